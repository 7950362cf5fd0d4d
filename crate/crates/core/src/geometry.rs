//! Intervals, bottom depth profiles and criticality.
//!
//! A [`DepthProfile`] describes the bottom `z = -d(x)` of a two-dimensional
//! fluid domain together with the characteristic slope `nu`. Catalog kinds
//! carry closed-form `d` and `d'`; `custom` profiles interpolate tabulated
//! depths with a monotone cubic.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;

/// A shared real function.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Named real parameters of a profile.
pub type Params = BTreeMap<String, f64>;

/// Band around `|d'(x)| = nu` reported as critical.
pub const CRITICALITY_TOL: f64 = 1e-9;

/// Distance from a registered kink below which a point counts as the kink.
const KINK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidParams(format!("invalid interval [{lo}, {hi}]")));
        }
        if (lo_closed && lo.is_infinite()) || (hi_closed && hi.is_infinite()) {
            return Err(Error::InvalidParams("an infinite endpoint cannot be closed".into()));
        }
        Ok(Self { lo, hi, lo_closed, hi_closed })
    }

    /// `[lo, hi]`; infinite endpoints are left open.
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: lo.is_finite(), hi_closed: hi.is_finite() }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn real_line() -> Self {
        Self::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Membership; closed endpoints accept points up to `tol` outside.
    pub fn contains_tol(&self, x: f64, tol: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        let above = if self.lo_closed { x >= self.lo - tol } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi + tol } else { x < self.hi };
        above && below
    }

    pub fn contains(&self, x: f64) -> bool {
        self.contains_tol(x, 0.0)
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Wedge,
    IsoscelesTriangle,
    SemiEllipse,
    HyperbolicLens,
    HyperbolicHump,
    DaiHyperbola,
    ParabolicSegment,
    InvolutionDerived,
    Custom,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 9] = [
        ProfileKind::Wedge,
        ProfileKind::IsoscelesTriangle,
        ProfileKind::SemiEllipse,
        ProfileKind::HyperbolicLens,
        ProfileKind::HyperbolicHump,
        ProfileKind::DaiHyperbola,
        ProfileKind::ParabolicSegment,
        ProfileKind::InvolutionDerived,
        ProfileKind::Custom,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileKind::Wedge => "wedge",
            ProfileKind::IsoscelesTriangle => "isosceles_triangle",
            ProfileKind::SemiEllipse => "semi_ellipse",
            ProfileKind::HyperbolicLens => "hyperbolic_lens",
            ProfileKind::HyperbolicHump => "hyperbolic_hump",
            ProfileKind::DaiHyperbola => "dai_hyperbola",
            ProfileKind::ParabolicSegment => "parabolic_segment",
            ProfileKind::InvolutionDerived => "involution_derived",
            ProfileKind::Custom => "custom",
        }
    }

    /// Accepted parameter names (beyond `nu`, `window_lo`, `window_hi`).
    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            ProfileKind::Wedge => &["tau", "b_plus"],
            ProfileKind::IsoscelesTriangle => &["tau"],
            ProfileKind::SemiEllipse => &["scale"],
            ProfileKind::HyperbolicLens => &["c", "scale"],
            ProfileKind::HyperbolicHump => &["tau", "scale"],
            ProfileKind::DaiHyperbola => &["r", "symmetric", "d0", "q"],
            ProfileKind::ParabolicSegment => &["c", "scale"],
            ProfileKind::InvolutionDerived => &["family", "x0", "b", "m", "scale"],
            ProfileKind::Custom => &["scale"],
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ProfileKind::Wedge => "d = tau (b_plus - x) on (-inf, b_plus]",
            ProfileKind::IsoscelesTriangle => "d = tau (1 - |x|) on [-1, 1]",
            ProfileKind::SemiEllipse => "d = sqrt(1 - x^2) on [-1, 1]",
            ProfileKind::HyperbolicLens => "d = c - sqrt(c^2 - 1 + x^2) on [-1, 1], c > 1",
            ProfileKind::HyperbolicHump => "d = tau sqrt(1/(1 - tau^2) + x^2) on the real line",
            ProfileKind::DaiHyperbola => "d = r/x on x > 0 (r/|x| when symmetric; 1/(d0 + r x) variant)",
            ProfileKind::ParabolicSegment => "depth whose forward map is T = 2x(1 - x) on [0, 1/2]",
            ProfileKind::InvolutionDerived => {
                "depth solving invol(x - d) = x + d; family 0: 1/x, 1: (x0-x)/(1+bx), 2: sqrt(2b^2-x^2), 3: PL(x0,m)"
            }
            ProfileKind::Custom => "tabulated (x, d) samples with monotone cubic interpolation",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProfileKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

/// Families of involution-derived profiles, selected by the `family` parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InvolutionFamily {
    /// invol(x) = 1/x, d = sqrt(x^2 - 1) for x <= -1.
    Reciprocal,
    /// invol(x) = (x0 - x)/(1 + b x).
    FractionalLinear { x0: f64, b: f64 },
    /// invol(x) = sqrt(2 b^2 - x^2), d = sqrt(b^2 - x^2) on [b/sqrt(2), b].
    EllipsePortion { b: f64 },
    /// Piecewise-linear PL(x0, m), supercritical wedge d = (m+1)(x - x0)/(m-1).
    PiecewiseLinear { x0: f64, m: f64 },
}

impl InvolutionFamily {
    fn from_params(p: &ParamReader<'_>) -> Result<Self> {
        let code = p.get_or("family", 0.0)?;
        if code.fract() != 0.0 {
            return Err(Error::InvalidParams("family must be an integer code".into()));
        }
        match code as i64 {
            0 => Ok(InvolutionFamily::Reciprocal),
            1 => {
                let x0 = p.get_or("x0", 0.0)?;
                let b = p.get_or("b", 1.0)?;
                if b <= 0.0 || 1.0 + x0 * b <= 0.0 {
                    return Err(Error::InvalidParams("fractional-linear family needs b > 0 and 1 + x0 b > 0".into()));
                }
                Ok(InvolutionFamily::FractionalLinear { x0, b })
            }
            2 => {
                let b = p.get_or("b", 1.0)?;
                if b <= 0.0 {
                    return Err(Error::InvalidParams("ellipse-portion family needs b > 0".into()));
                }
                Ok(InvolutionFamily::EllipsePortion { b })
            }
            3 => {
                let x0 = p.get_or("x0", 0.0)?;
                let m = p.get_or("m", 2.0)?;
                if m <= 1.0 {
                    return Err(Error::InvalidParams("piecewise-linear family needs m > 1".into()));
                }
                Ok(InvolutionFamily::PiecewiseLinear { x0, m })
            }
            other => Err(Error::InvalidParams(format!("unknown involution family {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Subcritical,
    CriticalWithinTolerance,
    Supercritical,
}

/// Bottom topography with its derivative and characteristic slope `nu`.
#[derive(Clone)]
pub struct DepthProfile {
    kind: ProfileKind,
    params: Params,
    domain: Interval,
    nu: f64,
    d: RealFn,
    d_prime: RealFn,
    kinks: Vec<f64>,
    window: (f64, f64),
    samples: Option<Vec<(f64, f64)>>,
}

impl fmt::Debug for DepthProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DepthProfile")
            .field("kind", &self.kind)
            .field("params", &self.params)
            .field("domain", &self.domain)
            .field("nu", &self.nu)
            .field("window", &self.window)
            .finish()
    }
}

struct ParamReader<'a> {
    kind: ProfileKind,
    params: &'a Params,
}

impl<'a> ParamReader<'a> {
    fn new(kind: ProfileKind, params: &'a Params) -> Result<Self> {
        for name in params.keys() {
            let known = matches!(name.as_str(), "nu" | "window_lo" | "window_hi")
                || kind.param_names().contains(&name.as_str());
            if !known {
                return Err(Error::InvalidParams(format!("unknown parameter `{name}` for {kind}")));
            }
        }
        for (name, v) in params {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("parameter `{name}` must be finite")));
            }
        }
        Ok(Self { kind, params })
    }

    fn get(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    fn get_or(&self, name: &str, default: f64) -> Result<f64> {
        Ok(self.get(name).unwrap_or(default))
    }

    fn require(&self, name: &str) -> Result<f64> {
        self.get(name)
            .ok_or_else(|| Error::InvalidParams(format!("{} requires parameter `{name}`", self.kind)))
    }

    fn positive(&self, name: &str, default: Option<f64>) -> Result<f64> {
        let v = match default {
            Some(d) => self.get_or(name, d)?,
            None => self.require(name)?,
        };
        if v <= 0.0 {
            return Err(Error::InvalidParams(format!("`{name}` must be positive, got {v}")));
        }
        Ok(v)
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Builds a catalog profile. `params` may carry `nu` (default 1) and
/// `window_lo`/`window_hi` for sampling unbounded domains.
pub fn make_profile(kind: &str, params: &Params) -> Result<DepthProfile> {
    let kind: ProfileKind = kind.parse()?;
    build(kind, params, None)
}

/// Builds a `custom` profile from tabulated `(x, d)` samples.
pub fn make_custom_profile(samples: &[(f64, f64)], params: &Params) -> Result<DepthProfile> {
    build(ProfileKind::Custom, params, Some(samples))
}

fn build(kind: ProfileKind, params: &Params, samples: Option<&[(f64, f64)]>) -> Result<DepthProfile> {
    let p = ParamReader::new(kind, params)?;
    let nu = p.positive("nu", Some(1.0))?;
    let scale = if kind.param_names().contains(&"scale") {
        p.positive("scale", Some(1.0))?
    } else {
        1.0
    };

    let mut kinks = Vec::new();
    let mut stored_samples = None;
    let (domain, default_window, d, d_prime): (Interval, (f64, f64), RealFn, RealFn) = match kind {
        ProfileKind::Wedge => {
            let tau = p.positive("tau", None)?;
            let bp = p.get_or("b_plus", 0.0)?;
            (
                Interval::closed(f64::NEG_INFINITY, bp),
                (bp - 2.0, bp),
                Arc::new(move |x| tau * (bp - x)),
                Arc::new(move |_| -tau),
            )
        }
        ProfileKind::IsoscelesTriangle => {
            let tau = p.positive("tau", None)?;
            kinks.push(0.0);
            (
                Interval::closed(-1.0, 1.0),
                (-1.0, 1.0),
                Arc::new(move |x: f64| tau * (1.0 - x.abs())),
                Arc::new(move |x| -tau * sign(x)),
            )
        }
        ProfileKind::SemiEllipse => (
            Interval::closed(-1.0, 1.0),
            (-1.0, 1.0),
            Arc::new(move |x: f64| scale * (1.0 - x * x).max(0.0).sqrt()),
            Arc::new(move |x: f64| -scale * x / (1.0 - x * x).sqrt()),
        ),
        ProfileKind::HyperbolicLens => {
            let c = p.require("c")?;
            if c <= 1.0 {
                return Err(Error::InvalidParams(format!("lens needs c > 1, got {c}")));
            }
            (
                Interval::closed(-1.0, 1.0),
                (-1.0, 1.0),
                Arc::new(move |x: f64| scale * (c - (c * c - 1.0 + x * x).sqrt())),
                Arc::new(move |x: f64| -scale * x / (c * c - 1.0 + x * x).sqrt()),
            )
        }
        ProfileKind::HyperbolicHump => {
            let tau = p.require("tau")?;
            if !(tau > 0.0 && tau < 1.0) {
                return Err(Error::InvalidParams(format!("hump needs 0 < tau < 1, got {tau}")));
            }
            let k = 1.0 / (1.0 - tau * tau);
            (
                Interval::real_line(),
                (-5.0, 5.0),
                Arc::new(move |x: f64| scale * tau * (k + x * x).sqrt()),
                Arc::new(move |x: f64| scale * tau * x / (k + x * x).sqrt()),
            )
        }
        ProfileKind::DaiHyperbola => {
            let r = p.positive("r", None)?;
            let symmetric = p.get_or("symmetric", 0.0)? != 0.0;
            if let Some(q) = p.get("q") {
                if q == 0.0 {
                    return Err(Error::InvalidParams("Dai flux q must be non-zero".into()));
                }
            }
            match p.get("d0") {
                Some(d0) => {
                    if (nu - 1.0).abs() > 1e-15 || symmetric {
                        return Err(Error::InvalidParams(
                            "the shifted Dai variant d = 1/(d0 + r x) is only defined for nu = 1".into(),
                        ));
                    }
                    let xs = -d0 / r;
                    (
                        Interval::open(xs, f64::INFINITY),
                        (xs + 0.25, xs + 4.0),
                        Arc::new(move |x| 1.0 / (d0 + r * x)),
                        Arc::new(move |x| -r / ((d0 + r * x) * (d0 + r * x))),
                    )
                }
                None if symmetric => {
                    kinks.push(0.0);
                    (
                        Interval::real_line(),
                        (-3.0, 3.0),
                        Arc::new(move |x: f64| r / x.abs()),
                        Arc::new(move |x: f64| -r * sign(x) / (x * x)),
                    )
                }
                None => (
                    Interval::open(0.0, f64::INFINITY),
                    (0.25, 4.0),
                    Arc::new(move |x| r / x),
                    Arc::new(move |x| -r / (x * x)),
                ),
            }
        }
        ProfileKind::ParabolicSegment => {
            let c = p.get_or("c", 0.25)?;
            if !(c > 0.0 && c < 0.5) {
                return Err(Error::InvalidParams(format!("parabolic segment needs 0 < c < 1/2, got {c}")));
            }
            // departure point x of the ray reflecting at X: 2x^2 - 3x + 2X = 0
            let departure = |xx: f64| (3.0 - (9.0 - 16.0 * xx).max(0.0).sqrt()) / 4.0;
            (
                Interval::closed(0.0, 0.5),
                (0.0, 0.5),
                Arc::new(move |xx| {
                    let x = departure(xx);
                    scale * x * (1.0 - 2.0 * x) / 2.0
                }),
                Arc::new(move |xx| {
                    let x = departure(xx);
                    scale * (1.0 - 4.0 * x) / (3.0 - 4.0 * x)
                }),
            )
        }
        ProfileKind::InvolutionDerived => match InvolutionFamily::from_params(&p)? {
            InvolutionFamily::Reciprocal => (
                Interval::closed(f64::NEG_INFINITY, -1.0),
                (-4.0, -1.0),
                Arc::new(move |x: f64| scale * (x * x - 1.0).max(0.0).sqrt()),
                Arc::new(move |x: f64| scale * x / (x * x - 1.0).sqrt()),
            ),
            InvolutionFamily::FractionalLinear { x0, b } => {
                let shift = 1.0 / b;
                let c2 = (1.0 + x0 * b) / (b * b);
                let right = -shift - c2.sqrt();
                (
                    Interval::closed(f64::NEG_INFINITY, right),
                    (right - 3.0, right),
                    Arc::new(move |x: f64| scale * ((x + shift).powi(2) - c2).max(0.0).sqrt()),
                    Arc::new(move |x: f64| scale * (x + shift) / ((x + shift).powi(2) - c2).sqrt()),
                )
            }
            InvolutionFamily::EllipsePortion { b } => (
                Interval::closed(b / 2f64.sqrt(), b),
                (b / 2f64.sqrt(), b),
                Arc::new(move |x: f64| scale * (b * b - x * x).max(0.0).sqrt()),
                Arc::new(move |x: f64| -scale * x / (b * b - x * x).sqrt()),
            ),
            InvolutionFamily::PiecewiseLinear { x0, m } => {
                let slope = (m + 1.0) / (m - 1.0);
                (
                    Interval::closed(x0, f64::INFINITY),
                    (x0, x0 + 2.0),
                    Arc::new(move |x| scale * slope * (x - x0)),
                    Arc::new(move |_| scale * slope),
                )
            }
        },
        ProfileKind::Custom => {
            let samples = samples.ok_or_else(|| {
                Error::InvalidParams("custom profiles need tabulated (x, d) samples".into())
            })?;
            if samples.iter().any(|s| s.1 < 0.0) {
                return Err(Error::InvalidParams("tabulated depths must be non-negative".into()));
            }
            let scaled: Vec<(f64, f64)> = samples.iter().map(|&(x, d)| (x, scale * d)).collect();
            let spline = Arc::new(MonotoneCubic::new(&scaled)?);
            stored_samples = Some(samples.to_vec());
            let s1 = spline.clone();
            (
                Interval::closed(spline.lo(), spline.hi()),
                (spline.lo(), spline.hi()),
                Arc::new(move |x| s1.eval(x).max(0.0)),
                Arc::new(move |x| spline.derivative(x)),
            )
        }
    };

    let window = (
        p.get_or("window_lo", default_window.0)?,
        p.get_or("window_hi", default_window.1)?,
    );
    if !(window.0 < window.1) {
        return Err(Error::InvalidParams(format!("empty sampling window {window:?}")));
    }

    Ok(DepthProfile {
        kind,
        params: params.clone(),
        domain,
        nu,
        d,
        d_prime,
        kinks,
        window,
        samples: stored_samples,
    })
}

impl DepthProfile {
    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn d(&self, x: f64) -> f64 {
        (self.d)(x)
    }

    pub fn d_prime(&self, x: f64) -> f64 {
        (self.d_prime)(x)
    }

    pub fn depth_fn(&self) -> RealFn {
        self.d.clone()
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    /// Finite sampling window; equals the domain when it is bounded.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn samples(&self) -> Option<&[(f64, f64)]> {
        self.samples.as_deref()
    }

    /// Depth scale factor applied on top of the base shape (1 unless set).
    pub fn scale(&self) -> f64 {
        self.param("scale").unwrap_or(1.0)
    }

    /// `nu / scale`: the slope the closed-form maps see for scaled kinds.
    pub fn effective_nu(&self) -> f64 {
        self.nu / self.scale()
    }

    /// Whether `d(b±) = 0` is required at finite endpoints.
    pub fn requires_closure(&self) -> bool {
        matches!(
            self.kind,
            ProfileKind::Wedge
                | ProfileKind::IsoscelesTriangle
                | ProfileKind::SemiEllipse
                | ProfileKind::HyperbolicLens
                | ProfileKind::ParabolicSegment
        )
    }

    pub fn involution_family(&self) -> Option<InvolutionFamily> {
        if self.kind != ProfileKind::InvolutionDerived {
            return None;
        }
        let p = ParamReader::new(self.kind, &self.params).ok()?;
        InvolutionFamily::from_params(&p).ok()
    }

    pub fn is_kink(&self, x: f64) -> bool {
        self.kinks.iter().any(|k| (x - k).abs() <= KINK_TOL)
    }

    /// Same profile with a different `nu`.
    pub fn with_nu(&self, nu: f64) -> Result<DepthProfile> {
        let mut params = self.params.clone();
        params.insert("nu".into(), nu);
        build(self.kind, &params, self.samples.as_deref())
    }

    /// Pointwise criticality of the bottom at an interior point.
    pub fn classify(&self, x: f64) -> Result<Criticality> {
        if !self.domain.contains_interior(x) {
            return Err(Error::OutOfDomain { x });
        }
        if self.is_kink(x) {
            return Err(Error::NonDifferentiable { x });
        }
        let excess = self.d_prime(x).abs() - self.nu;
        Ok(if excess < -CRITICALITY_TOL {
            Criticality::Subcritical
        } else if excess > CRITICALITY_TOL {
            Criticality::Supercritical
        } else {
            Criticality::CriticalWithinTolerance
        })
    }

    /// Worst pointwise class over `n` interior samples of the window; kinks are skipped.
    pub fn classify_profile(&self, n: usize) -> Criticality {
        let (lo, hi) = self.window;
        (0..n)
            .map(|i| lo + (i as f64 + 0.5) * (hi - lo) / n as f64)
            .filter_map(|x| self.classify(x).ok())
            .max()
            .unwrap_or(Criticality::Subcritical)
    }

    /// Rescales `z` so that `nu = 1`: the new depth is `d / nu`.
    pub fn normalize_nu(&self) -> DepthProfile {
        if self.nu == 1.0 {
            return self.clone();
        }
        let nu = self.nu;
        let mut params = self.params.clone();
        params.insert("nu".into(), 1.0);
        match self.kind {
            ProfileKind::Wedge | ProfileKind::IsoscelesTriangle => {
                let tau = params["tau"];
                params.insert("tau".into(), tau / nu);
            }
            ProfileKind::DaiHyperbola => {
                let r = params["r"];
                params.insert("r".into(), r / nu);
            }
            _ => {
                params.insert("scale".into(), self.scale() / nu);
            }
        }
        build(self.kind, &params, self.samples.as_deref())
            .expect("rescaling a valid profile keeps its parameters valid")
    }
}

/// JSON form of a profile: `{"kind": ..., "params": {...}, "nu": ...}`.
/// Custom profiles additionally carry `samples: [[x, d], ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub kind: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
}

fn default_nu() -> f64 {
    1.0
}

impl ProfileSpec {
    pub fn new(kind: &str, params: &[(&str, f64)], nu: f64) -> Self {
        Self {
            kind: kind.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            nu,
            samples: None,
        }
    }

    pub fn build(&self) -> Result<DepthProfile> {
        let mut params = self.params.clone();
        params.insert("nu".into(), self.nu);
        let kind: ProfileKind = self.kind.parse()?;
        match (&self.samples, kind) {
            (Some(s), ProfileKind::Custom) => {
                let pts: Vec<(f64, f64)> = s.iter().map(|p| (p[0], p[1])).collect();
                make_custom_profile(&pts, &params)
            }
            (Some(_), _) => Err(Error::InvalidParams("samples are only accepted for custom profiles".into())),
            (None, k) => build(k, &params, None),
        }
    }
}

pub fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}
