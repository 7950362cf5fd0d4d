//! Characteristic maps `delta±(x) = x ± d(x)/nu` and the forward map
//! `T = delta+ ∘ delta-^{-1}`.
//!
//! Catalog profiles register closed forms; everything else goes through a
//! bracketed numeric inversion of `delta-`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{DepthProfile, Interval, InvolutionFamily, ProfileKind, RealFn};

/// Upper bound on the number of map applications in a single orbit walk.
pub const ITERATION_CAP: usize = 10_000;

/// Tolerance for domain membership of orbit points.
pub const DOMAIN_TOL: f64 = 1e-12;

const MONOTONE_LATTICE: usize = 64;
const BISECTION_WIDTH: f64 = 1e-8;
const NEWTON_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `delta±(x) = x ± d(x)/nu`.
pub fn delta(profile: &DepthProfile, sign: Sign, x: f64) -> Result<f64> {
    if !profile.domain().contains_tol(x, DOMAIN_TOL) {
        return Err(Error::OutOfDomain { x });
    }
    let shift = profile.d(x) / profile.nu();
    Ok(match sign {
        Sign::Plus => x + shift,
        Sign::Minus => x - shift,
    })
}

/// Solves `g(y) = target` for increasing `g` on `[lo, hi]`.
///
/// Bisection shrinks the bracket to `1e-8`, then guarded Newton steps polish
/// until `|g(y) - target| <= 1e-12`. Returns `None` when the target lies
/// outside `[g(lo), g(hi)]`.
pub fn invert_increasing(
    g: &dyn Fn(f64) -> f64,
    g_prime: &dyn Fn(f64) -> f64,
    target: f64,
    lo: f64,
    hi: f64,
) -> Option<f64> {
    let (glo, ghi) = (g(lo), g(hi));
    if !(target >= glo - NEWTON_RESIDUAL && target <= ghi + NEWTON_RESIDUAL) {
        return None;
    }
    if (glo - target).abs() <= NEWTON_RESIDUAL {
        return Some(lo);
    }
    if (ghi - target).abs() <= NEWTON_RESIDUAL {
        return Some(hi);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > BISECTION_WIDTH {
        let m = 0.5 * (a + b);
        if g(m) < target {
            a = m;
        } else {
            b = m;
        }
    }
    let mut y = 0.5 * (a + b);
    for _ in 0..100 {
        let r = g(y) - target;
        if r.abs() <= NEWTON_RESIDUAL {
            return Some(y);
        }
        if r < 0.0 {
            a = y;
        } else {
            b = y;
        }
        let slope = g_prime(y);
        let next = y - r / slope;
        y = if slope.is_finite() && slope > 0.0 && next > a && next < b {
            next
        } else {
            0.5 * (a + b)
        };
        if b - a <= f64::EPSILON * (1.0 + y.abs()) {
            break;
        }
    }
    Some(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapForm {
    ClosedForm,
    Numeric,
}

/// The forward map `T` of a profile together with its inverse.
#[derive(Clone)]
pub struct ForwardMap {
    profile: Option<Arc<DepthProfile>>,
    form: MapForm,
    forward: RealFn,
    backward: RealFn,
    domain: Interval,
    window: (f64, f64),
    fixed_points: (Option<f64>, Option<f64>),
    params: BTreeMap<String, f64>,
    label: String,
}

impl fmt::Debug for ForwardMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForwardMap")
            .field("label", &self.label)
            .field("form", &self.form)
            .field("domain", &self.domain)
            .field("window", &self.window)
            .field("fixed_points", &self.fixed_points)
            .field("params", &self.params)
            .finish()
    }
}

impl ForwardMap {
    /// A closed-form map from explicit forward and inverse functions.
    pub fn closed_form(
        label: impl Into<String>,
        forward: RealFn,
        backward: RealFn,
        domain: Interval,
        window: (f64, f64),
    ) -> Self {
        Self {
            profile: None,
            form: MapForm::ClosedForm,
            forward,
            backward,
            domain,
            window,
            fixed_points: (None, None),
            params: BTreeMap::new(),
            label: label.into(),
        }
    }

    fn with_fixed_points(mut self, lo: Option<f64>, hi: Option<f64>) -> Self {
        self.fixed_points = (lo, hi);
        self
    }

    fn with_param(mut self, name: &str, v: f64) -> Self {
        self.params.insert(name.to_string(), v);
        self
    }

    fn with_profile(mut self, profile: &DepthProfile) -> Self {
        self.profile = Some(Arc::new(profile.clone()));
        self
    }

    pub fn form(&self) -> MapForm {
        self.form
    }

    pub fn profile(&self) -> Option<&DepthProfile> {
        self.profile.as_deref()
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Finite interval of departure points used for sweeps.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn fixed_points(&self) -> (Option<f64>, Option<f64>) {
        self.fixed_points
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Raw `T(x)`; NaN where undefined.
    pub fn eval(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    /// Raw `T^{-1}(y)`; NaN where undefined.
    pub fn eval_inverse(&self, y: f64) -> f64 {
        (self.backward)(y)
    }

    pub fn forward_fn(&self) -> RealFn {
        self.forward.clone()
    }

    /// Checked `T(x)`.
    pub fn apply(&self, x: f64) -> Result<f64> {
        if !self.domain.contains_tol(x, DOMAIN_TOL) {
            return Err(Error::OutOfDomain { x });
        }
        let y = (self.forward)(x);
        if !y.is_finite() {
            return Err(Error::OutOfDomain { x });
        }
        Ok(y)
    }

    /// Checked `T^{-1}(y)`; the preimage must lie in the map domain.
    pub fn apply_inverse(&self, y: f64) -> Result<f64> {
        let x = (self.backward)(y);
        if !x.is_finite() || !self.domain.contains_tol(x, DOMAIN_TOL) {
            return Err(Error::OutOfDomain { x: y });
        }
        Ok(x)
    }
}

/// Closed-form involution of a profile family and the interval it acts on.
pub fn family_involution(family: InvolutionFamily) -> (RealFn, Interval) {
    match family {
        InvolutionFamily::Reciprocal => (Arc::new(|x| 1.0 / x), Interval::open(f64::NEG_INFINITY, 0.0)),
        InvolutionFamily::FractionalLinear { x0, b } => (
            Arc::new(move |x| (x0 - x) / (1.0 + b * x)),
            Interval::open(f64::NEG_INFINITY, -1.0 / b),
        ),
        InvolutionFamily::EllipsePortion { b } => {
            let r = 2f64.sqrt() * b;
            (
                Arc::new(move |x: f64| (2.0 * b * b - x * x).max(0.0).sqrt()),
                Interval::closed(0.0, r),
            )
        }
        InvolutionFamily::PiecewiseLinear { x0, m } => (
            Arc::new(move |x| piecewise_linear_involution(x0, m, x)),
            Interval::real_line(),
        ),
    }
}

/// `PL(x0, m, x)`: slope `-m` left of `x0`, `-1/m` right of it.
pub fn piecewise_linear_involution(x0: f64, m: f64, x: f64) -> f64 {
    0.5 * (m - 1.0 / m) * (x0 - x).abs() + 0.5 * (m + 1.0 / m) * (x0 - x) + x0
}

fn is_unit(nu: f64) -> bool {
    (nu - 1.0).abs() <= 1e-15
}

fn departure_window(profile: &DepthProfile) -> (f64, f64) {
    let (lo, hi) = profile.window();
    let nu = profile.nu();
    let a = lo - profile.d(lo) / nu;
    let b = hi - profile.d(hi) / nu;
    (a.min(b), a.max(b))
}

/// Forward map of a profile: the registered closed form when one exists for
/// the profile's parameters, the numeric construction otherwise.
pub fn build_forward_map(profile: &DepthProfile) -> Result<ForwardMap> {
    match closed_form_map(profile)? {
        Some(map) => Ok(map),
        None => build_numeric_forward_map(profile),
    }
}

fn closed_form_map(profile: &DepthProfile) -> Result<Option<ForwardMap>> {
    let nu = profile.nu();
    let nu_eff = profile.effective_nu();
    let label = format!("{} closed form", profile.kind());
    let map = match profile.kind() {
        ProfileKind::Wedge => {
            let tau = profile.param("tau").unwrap_or(0.0) / nu;
            if tau >= 1.0 {
                return Err(Error::NotInvertible(format!("wedge slope tau/nu = {tau} is not subcritical")));
            }
            let bp = profile.param("b_plus").unwrap_or(0.0);
            let p = (1.0 - tau) / (1.0 + tau);
            let s = bp * 2.0 * tau / (1.0 + tau);
            ForwardMap::closed_form(
                label,
                Arc::new(move |x| p * x + s),
                Arc::new(move |y| (y - s) / p),
                profile.domain(),
                profile.window(),
            )
            .with_fixed_points(Some(f64::NEG_INFINITY), Some(bp))
            .with_param("p", p)
            .with_param("s", s)
        }
        ProfileKind::IsoscelesTriangle => {
            let tau = profile.param("tau").unwrap_or(0.0) / nu;
            if tau >= 1.0 {
                return Err(Error::NotInvertible(format!("triangle slope tau/nu = {tau} is not subcritical")));
            }
            let p = (1.0 - tau) / (1.0 + tau);
            let s_plus = 2.0 * tau / (1.0 + tau);
            let s_minus = 2.0 * tau / (1.0 - tau);
            ForwardMap::closed_form(
                label,
                Arc::new(move |x| if x <= -tau { x / p + s_minus } else { p * x + s_plus }),
                Arc::new(move |y| if y <= tau { p * y - s_plus } else { y / p - s_minus }),
                profile.domain(),
                profile.window(),
            )
            .with_fixed_points(Some(-1.0), Some(1.0))
            .with_param("p", p)
            .with_param("s_plus", s_plus)
            .with_param("s_minus", s_minus)
        }
        ProfileKind::SemiEllipse => {
            let v = nu_eff;
            let v2 = v * v;
            let t = move |x: f64| (2.0 * (1.0 - v2 * (x * x - 1.0)).max(0.0).sqrt() + (v2 - 1.0) * x) / (v2 + 1.0);
            ForwardMap::closed_form(
                label,
                Arc::new(t),
                Arc::new(move |y| -t(-y)),
                profile.domain(),
                profile.window(),
            )
            .with_fixed_points(None, Some(1.0))
            .with_param("theta_nu", (1.0 / v).atan())
        }
        ProfileKind::HyperbolicLens if is_unit(nu_eff) => {
            let c = profile.param("c").unwrap_or(2.0);
            ForwardMap::closed_form(
                label,
                Arc::new(move |x| (1.0 + c * x) / (c + x)),
                Arc::new(move |y| (c * y - 1.0) / (c - y)),
                profile.domain(),
                profile.window(),
            )
            .with_fixed_points(Some(-1.0), Some(1.0))
        }
        ProfileKind::HyperbolicHump if is_unit(nu_eff) => {
            let tau = profile.param("tau").unwrap_or(0.5);
            let q = 2.0 * tau.atanh();
            let (ch, sh) = (q.cosh(), q.sinh());
            ForwardMap::closed_form(
                label,
                Arc::new(move |x: f64| x * ch + (1.0 + x * x).sqrt() * sh),
                Arc::new(move |y: f64| y * ch - (1.0 + y * y).sqrt() * sh),
                profile.domain(),
                profile.window(),
            )
            .with_fixed_points(Some(f64::NEG_INFINITY), Some(f64::INFINITY))
            .with_param("q", q)
        }
        ProfileKind::DaiHyperbola => {
            let r = profile.param("r").unwrap_or(1.0);
            // d = R/(x - xs): R = r/nu for the plain hyperbola, 1/r for the shifted variant
            let (xs, big_r) = match profile.param("d0") {
                Some(d0) => (-d0 / r, 1.0 / r),
                None => (0.0, r / nu),
            };
            let (wlo, whi) = profile.window();
            let window = (wlo.max(xs + 0.1 * big_r.sqrt()), whi);
            ForwardMap::closed_form(
                label,
                Arc::new(move |x| xs + (4.0 * big_r + (x - xs) * (x - xs)).sqrt()),
                Arc::new(move |y| xs + ((y - xs) * (y - xs) - 4.0 * big_r).sqrt()),
                Interval::real_line(),
                window,
            )
            .with_fixed_points(None, Some(f64::INFINITY))
        }
        ProfileKind::ParabolicSegment if is_unit(nu_eff) => ForwardMap::closed_form(
            label,
            Arc::new(|x| 2.0 * x * (1.0 - x)),
            Arc::new(|y: f64| (1.0 - (1.0 - 2.0 * y).max(0.0).sqrt()) / 2.0),
            profile.domain(),
            profile.window(),
        )
        .with_fixed_points(Some(0.0), Some(0.5)),
        ProfileKind::InvolutionDerived => {
            if !is_unit(nu_eff) {
                return Err(Error::NotInvertible("involution-derived maps are registered for nu = 1 only".into()));
            }
            let family = profile
                .involution_family()
                .ok_or_else(|| Error::InvalidParams("invalid involution family".into()))?;
            let (invol, domain) = family_involution(family);
            ForwardMap::closed_form(label, invol.clone(), invol, domain, departure_window(profile))
        }
        _ => return Ok(None),
    };
    Ok(Some(map.with_profile(profile)))
}

/// Numeric forward map from bracketed inversion of `delta-` on the profile window.
pub fn build_numeric_forward_map(profile: &DepthProfile) -> Result<ForwardMap> {
    let (lo, hi) = profile.window();
    let nu = profile.nu();
    let d = profile.depth_fn();
    let dp = {
        let p = profile.clone();
        move |x: f64| p.d_prime(x)
    };

    for (name, sgn) in [("delta-", -1.0), ("delta+", 1.0)] {
        let vals: Vec<f64> = (0..=MONOTONE_LATTICE)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / MONOTONE_LATTICE as f64;
                x + sgn * d(x) / nu
            })
            .collect();
        if vals.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::NotInvertible(format!("{name} is not strictly increasing on [{lo}, {hi}]")));
        }
    }

    let fwd = {
        let (d, dp) = (d.clone(), dp.clone());
        move |x: f64| {
            let g = |y: f64| y - d(y) / nu;
            let gp = |y: f64| 1.0 - dp(y) / nu;
            match invert_increasing(&g, &gp, x, lo, hi) {
                Some(y) => y + d(y) / nu,
                None => f64::NAN,
            }
        }
    };
    let bwd = {
        let d = d.clone();
        move |y: f64| {
            let g = |x: f64| x + d(x) / nu;
            let gp = |x: f64| 1.0 + dp(x) / nu;
            match invert_increasing(&g, &gp, y, lo, hi) {
                Some(x) => x - d(x) / nu,
                None => f64::NAN,
            }
        }
    };

    let dom_lo = lo - d(lo) / nu;
    let dom_hi = hi - d(hi) / nu;
    let fixed = |x: f64| if d(x).abs() < 1e-12 { Some(x) } else { None };
    Ok(ForwardMap {
        profile: Some(Arc::new(profile.clone())),
        form: MapForm::Numeric,
        forward: Arc::new(fwd),
        backward: Arc::new(bwd),
        domain: Interval::closed(dom_lo, dom_hi),
        window: (dom_lo, dom_hi),
        fixed_points: (fixed(lo), fixed(hi)),
        params: BTreeMap::new(),
        label: format!("{} numeric", profile.kind()),
    })
}

/// `T^[k](x)`; negative `k` applies the inverse.
pub fn iterate(map: &ForwardMap, x: f64, k: i64) -> Result<f64> {
    if k.unsigned_abs() as usize > ITERATION_CAP {
        return Err(Error::IterationCapExceeded { cap: ITERATION_CAP });
    }
    let mut y = x;
    if k >= 0 {
        for _ in 0..k {
            y = map.apply(y)?;
        }
    } else {
        if !map.domain().contains_tol(y, DOMAIN_TOL) {
            return Err(Error::OutOfDomain { x: y });
        }
        for _ in 0..(-k) {
            y = map.apply_inverse(y)?;
        }
    }
    Ok(y)
}

/// `|d((x + T(x))/2) - nu (T(x) - x)/2|`: the ray from `(x, 0)` reflects off
/// the bottom halfway to `T(x)`.
pub fn reflection_identity_residual(profile: &DepthProfile, map: &ForwardMap, x: f64) -> Result<f64> {
    let t = map.apply(x)?;
    let mid = 0.5 * (x + t);
    if !profile.domain().contains_tol(mid, DOMAIN_TOL) {
        return Err(Error::OutOfDomain { x: mid });
    }
    Ok((profile.d(mid) - profile.nu() * (t - x) / 2.0).abs())
}

/// A strictly monotone function with an evaluable inverse.
#[derive(Clone)]
pub struct InvertibleFn {
    pub eval: RealFn,
    pub inverse: RealFn,
    pub domain: Interval,
    pub window: (f64, f64),
}

impl fmt::Debug for InvertibleFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InvertibleFn")
            .field("domain", &self.domain)
            .field("window", &self.window)
            .finish()
    }
}

/// `T(x) = a^{-1}(a(x) + Q)`.
pub fn map_from_abel(a: &InvertibleFn, q: f64) -> Result<ForwardMap> {
    let (lo, hi) = a.window;
    let vals: Vec<f64> = (0..=MONOTONE_LATTICE)
        .map(|i| (a.eval)(lo + (hi - lo) * i as f64 / MONOTONE_LATTICE as f64))
        .collect();
    let increasing = vals.windows(2).all(|w| w[1] > w[0]);
    let decreasing = vals.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::NotInvertible("Abel function is not strictly monotone".into()));
    }
    let (f1, i1) = (a.eval.clone(), a.inverse.clone());
    let (f2, i2) = (a.eval.clone(), a.inverse.clone());
    let dom = a.domain;
    Ok(ForwardMap::closed_form(
        "from Abel function",
        Arc::new(move |x| i1(f1(x) + q)),
        Arc::new(move |y| i2(f2(y) - q)),
        dom,
        a.window,
    )
    .with_fixed_points(Some(dom.lo), Some(dom.hi))
    .with_param("q", q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_custom_profile, make_profile, params};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn triangle() -> DepthProfile {
        make_profile("isosceles_triangle", &params(&[("tau", 0.35)])).unwrap()
    }

    fn lens() -> DepthProfile {
        make_profile("hyperbolic_lens", &params(&[("c", 2.0)])).unwrap()
    }

    fn catalog_with_maps() -> Vec<(DepthProfile, ForwardMap)> {
        let profiles = vec![
            make_profile("wedge", &params(&[("tau", 0.5)])).unwrap(),
            triangle(),
            make_profile("semi_ellipse", &params(&[])).unwrap(),
            make_profile("semi_ellipse", &params(&[("nu", 0.577)])).unwrap(),
            lens(),
            make_profile("hyperbolic_lens", &params(&[("c", 2.0), ("nu", 1.5)])).unwrap(),
            make_profile("hyperbolic_hump", &params(&[("tau", 0.4)])).unwrap(),
            make_profile("dai_hyperbola", &params(&[("r", 1.0)])).unwrap(),
            make_profile("dai_hyperbola", &params(&[("r", 1.0), ("nu", 2.0)])).unwrap(),
            make_profile("dai_hyperbola", &params(&[("r", 2.0), ("d0", 1.0)])).unwrap(),
            make_profile("parabolic_segment", &params(&[])).unwrap(),
            make_profile("involution_derived", &params(&[("family", 0.0)])).unwrap(),
            make_profile("involution_derived", &params(&[("family", 1.0), ("x0", 0.5), ("b", 1.0)])).unwrap(),
            make_profile("involution_derived", &params(&[("family", 2.0), ("b", 1.0)])).unwrap(),
            make_profile("involution_derived", &params(&[("family", 3.0), ("x0", 0.0), ("m", 2.0)])).unwrap(),
            make_custom_profile(&[(0.0, 0.0), (0.5, 0.2), (1.0, 0.3), (1.5, 0.1), (2.0, 0.0)], &params(&[]))
                .unwrap(),
        ];
        profiles
            .into_iter()
            .map(|p| {
                let m = build_forward_map(&p).unwrap();
                (p, m)
            })
            .collect()
    }

    #[test]
    fn delta_examples() {
        let tri = triangle();
        assert!((delta(&tri, Sign::Minus, 0.0).unwrap() + 0.35).abs() < 1e-15);
        assert!((delta(&tri, Sign::Plus, 0.0).unwrap() - 0.35).abs() < 1e-15);
        assert_eq!(delta(&tri, Sign::Plus, 1.0).unwrap(), 1.0);
        assert_eq!(delta(&tri, Sign::Minus, 1.0).unwrap(), 1.0);
        let l = lens();
        let e = 2.0 - 3f64.sqrt();
        assert!((delta(&l, Sign::Plus, 0.0).unwrap() - e).abs() < 1e-15);
        assert!((delta(&l, Sign::Minus, 0.0).unwrap() + e).abs() < 1e-15);
        assert!(matches!(delta(&tri, Sign::Plus, 1.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn closed_form_examples() {
        let lm = build_forward_map(&lens()).unwrap();
        assert_eq!(lm.form(), MapForm::ClosedForm);
        assert!((lm.eval(0.0) - 0.5).abs() < 1e-15);

        let tm = build_forward_map(&triangle()).unwrap();
        assert!((tm.eval(-0.35) - 0.35).abs() < 1e-15);

        let em = build_forward_map(&make_profile("semi_ellipse", &params(&[])).unwrap()).unwrap();
        for i in 0..=20 {
            let x = -1.0 + 0.1 * i as f64;
            assert!((em.eval(x) - (2.0 - x * x).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn iterate_examples() {
        let tm = build_forward_map(&triangle()).unwrap();
        let p: f64 = 13.0 / 27.0;
        let direct = iterate(&tm, 0.0, 2).unwrap();
        assert!((direct - (1.0 - p * p)).abs() < 1e-15);
        assert!((direct - 0.768_175_582_990_397_8).abs() < 1e-12);
        // affine closed form for the right branch
        for k in 0..8 {
            let v = iterate(&tm, 0.2, k).unwrap();
            assert!((v - (1.0 + p.powi(k as i32) * (0.2 - 1.0))).abs() < 1e-14);
        }
        assert_eq!(iterate(&tm, 0.123, 0).unwrap(), 0.123);
        for x in [-0.9, -0.3, 0.0, 0.4, 0.95] {
            let y = iterate(&tm, x, 1).unwrap();
            assert!((iterate(&tm, y, -1).unwrap() - x).abs() < 1e-10);
        }
        assert!(matches!(iterate(&tm, 0.0, 20_000), Err(Error::IterationCapExceeded { .. })));
        let em = build_forward_map(&make_profile("semi_ellipse", &params(&[])).unwrap()).unwrap();
        assert!(matches!(iterate(&em, 0.5, 2), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn composition_law() {
        let lm = build_forward_map(&lens()).unwrap();
        for x in [-0.8, -0.1, 0.3, 0.7] {
            for j in -3i64..=3 {
                for k in -3i64..=3 {
                    let a = iterate(&lm, iterate(&lm, x, j).unwrap(), k).unwrap();
                    let b = iterate(&lm, x, j + k).unwrap();
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn reflection_identity_examples() {
        let tri = triangle();
        let tm = build_forward_map(&tri).unwrap();
        assert!(reflection_identity_residual(&tri, &tm, -0.35).unwrap() < 1e-15);

        let zero = make_custom_profile(&[(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)], &params(&[])).unwrap();
        let zm = build_forward_map(&zero).unwrap();
        for x in [-0.5, 0.0, 0.7] {
            assert!((zm.eval(x) - x).abs() < 1e-12);
            assert!(reflection_identity_residual(&zero, &zm, x).unwrap() < 1e-12);
        }

        let l = lens();
        let lm = build_forward_map(&l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let worst = (0..100)
            .map(|_| reflection_identity_residual(&l, &lm, rng.gen_range(-1.0..1.0)).unwrap())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn reflection_identity_holds_for_catalog() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, m) in catalog_with_maps() {
            let (lo, hi) = m.window();
            for _ in 0..100 {
                let x = rng.gen_range(lo..hi);
                let r = reflection_identity_residual(&p, &m, x).unwrap();
                assert!(r < 1e-9, "{} at {x}: {r}", m.label());
            }
        }
    }

    #[test]
    fn subcritical_maps_are_increasing_with_fixed_ends() {
        let subcritical = [
            make_profile("isosceles_triangle", &params(&[("tau", 0.35)])).unwrap(),
            lens(),
            make_profile("parabolic_segment", &params(&[])).unwrap(),
            make_profile("hyperbolic_lens", &params(&[("c", 3.0), ("nu", 0.8)])).unwrap(),
        ];
        for p in subcritical {
            let m = build_forward_map(&p).unwrap();
            let dom = p.domain();
            let mut prev = f64::NEG_INFINITY;
            for i in 1..500 {
                let x = dom.lo + dom.width() * i as f64 / 500.0;
                let t = m.eval(x);
                assert!(t > prev, "{} not increasing", m.label());
                assert!(t > x, "{} has T(x) <= x at {x}", m.label());
                prev = t;
                let back = m.eval_inverse(t);
                if i % 5 == 0 {
                    assert!((back - x).abs() < 1e-10);
                }
            }
            assert!((m.eval(dom.lo) - dom.lo).abs() < 1e-9);
            assert!((m.eval(dom.hi) - dom.hi).abs() < 1e-9);
        }
    }

    #[test]
    fn numeric_matches_closed_form() {
        let profiles = [
            lens(),
            triangle(),
            make_profile("wedge", &params(&[("tau", 0.5), ("b_plus", 0.0)])).unwrap(),
        ];
        for p in profiles {
            let closed = build_forward_map(&p).unwrap();
            let numeric = build_numeric_forward_map(&p).unwrap();
            assert_eq!(numeric.form(), MapForm::Numeric);
            let (lo, hi) = numeric.window();
            for i in 1..=500 {
                let x = lo + (hi - lo) * i as f64 / 501.0;
                let (a, b) = (closed.eval(x), numeric.eval(x));
                assert!((a - b).abs() < 1e-9, "{:?} at {x}: {a} vs {b}", p.kind());
                let (ia, ib) = (closed.eval_inverse(x), numeric.eval_inverse(x));
                if ib.is_finite() {
                    assert!((ia - ib).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn numeric_detects_non_monotone_delta() {
        let steep = make_profile("isosceles_triangle", &params(&[("tau", 1.5)])).unwrap();
        assert!(matches!(build_numeric_forward_map(&steep), Err(Error::NotInvertible(_))));
        assert!(matches!(build_forward_map(&steep), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn orbit_converges_monotonically() {
        for p in [triangle(), lens()] {
            let m = build_forward_map(&p).unwrap();
            for x0 in [-0.9, -0.2, 0.4] {
                let mut x = x0;
                let mut prev_gap: Option<f64> = None;
                for _ in 0..60 {
                    let gap = 1.0 - x;
                    if let Some(g) = prev_gap {
                        if g < 0.1 && gap > 0.0 {
                            assert!(gap <= g);
                        }
                    }
                    prev_gap = Some(gap);
                    x = m.eval(x);
                }
            }
        }
    }

    #[test]
    fn map_from_abel_examples() {
        let tau: f64 = 0.4;
        let hump = make_profile("hyperbolic_hump", &params(&[("tau", tau)])).unwrap();
        let th = build_forward_map(&hump).unwrap();
        let asinh = InvertibleFn {
            eval: Arc::new(f64::asinh),
            inverse: Arc::new(f64::sinh),
            domain: Interval::real_line(),
            window: (-5.0, 5.0),
        };
        let q = ((1.0 + tau) / (1.0 - tau)).ln();
        let m = map_from_abel(&asinh, q).unwrap();
        let printed = |x: f64| ((1.0 + tau * tau) * x + 2.0 * tau * (1.0 + x * x).sqrt()) / (1.0 - tau * tau);
        for i in 0..=200 {
            let x = -5.0 + 0.05 * i as f64;
            assert!((m.eval(x) - printed(x)).abs() < 1e-9 * (1.0 + x.abs()));
            assert!((m.eval(x) - th.eval(x)).abs() < 1e-9 * (1.0 + x.abs()));
        }
        for k in -3..=3 {
            let x: f64 = 0.7;
            let direct = (x.asinh() + k as f64 * q).sinh();
            assert!((iterate(&m, x, k).unwrap() - direct).abs() < 1e-9 * direct.abs().max(1.0));
        }

        let id = InvertibleFn {
            eval: Arc::new(|x| x),
            inverse: Arc::new(|x| x),
            domain: Interval::real_line(),
            window: (-1.0, 1.0),
        };
        let shift = map_from_abel(&id, 0.3).unwrap();
        assert!((shift.eval(1.0) - 1.3).abs() < 1e-15);

        let atanh = InvertibleFn {
            eval: Arc::new(f64::atanh),
            inverse: Arc::new(f64::tanh),
            domain: Interval::open(-1.0, 1.0),
            window: (-0.99, 0.99),
        };
        let tm = map_from_abel(&atanh, 0.5f64.atanh()).unwrap();
        assert!((tm.eval(0.0) - 0.5).abs() < 1e-15);

        // source flow: a = 1/x gives T = x/(1+x)
        let recip = InvertibleFn {
            eval: Arc::new(|x| 1.0 / x),
            inverse: Arc::new(|x| 1.0 / x),
            domain: Interval::open(0.0, f64::INFINITY),
            window: (0.1, 5.0),
        };
        let sm = map_from_abel(&recip, 1.0).unwrap();
        assert!((sm.eval(2.0) - 2.0 / 3.0).abs() < 1e-15);

        let wiggle = InvertibleFn {
            eval: Arc::new(|x: f64| x.sin()),
            inverse: Arc::new(f64::asin),
            domain: Interval::real_line(),
            window: (-3.0, 3.0),
        };
        assert!(matches!(map_from_abel(&wiggle, 0.1), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn invert_increasing_hits_tolerance() {
        let g = |x: f64| x + 0.3 * x.abs() - 0.1 * x * x * x;
        let gp = |x: f64| 1.0 + 0.3 * x.signum() - 0.3 * x * x;
        for i in 0..100 {
            let t = -1.0 + 0.02 * i as f64;
            if let Some(y) = invert_increasing(&g, &gp, t, -1.0, 1.0) {
                assert!((g(y) - t).abs() <= 1e-12);
            }
        }
        assert!(invert_increasing(&g, &gp, 10.0, -1.0, 1.0).is_none());
    }
}
