//! Solutions of the Abel equation `a(T(x)) = a(x) + Q`.
//!
//! [`extend_seed`] propagates a strictly increasing seed on the fundamental
//! interval `[x0, T(x0))` to the whole orbit domain; [`closed_form_abel`]
//! returns the catalogued elementary solutions.

use std::fmt;
use std::sync::Arc;

use crate::charmap::{build_forward_map, invert_increasing, ForwardMap, ITERATION_CAP};
use crate::error::{Error, Result};
use crate::geometry::{make_profile, Interval, Params, ProfileKind, RealFn};
use crate::interp::MonotoneCubic;
use crate::schroder::detect_involution;

pub type FallibleFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Membership tolerance for the half-open intervals `[x_k, x_{k+1})`.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

const SEED_LATTICE: usize = 64;
const JUMP_TOL: f64 = 1e-9;
const SWEEP_POINTS: usize = 500;
const INVOLUTION_PROBE_ORDER: usize = 8;

fn tol_at(x: f64) -> f64 {
    MEMBERSHIP_TOL * (1.0 + x.abs())
}

/// A strictly increasing function on a fundamental interval.
#[derive(Clone)]
pub struct SeedFunction {
    x0: f64,
    x1: f64,
    eval: RealFn,
    declared_q: Option<f64>,
}

impl fmt::Debug for SeedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeedFunction")
            .field("x0", &self.x0)
            .field("x1", &self.x1)
            .field("declared_q", &self.declared_q)
            .finish()
    }
}

impl SeedFunction {
    /// Seed `eval` on `[x0, x1)`; `eval` must also be defined at `x1`.
    pub fn new(x0: f64, x1: f64, eval: RealFn) -> Result<Self> {
        if !(x0.is_finite() && x1.is_finite() && x0 < x1) {
            return Err(Error::InvalidSeed(format!("empty fundamental interval [{x0}, {x1})")));
        }
        let vals: Vec<f64> = (0..=SEED_LATTICE)
            .map(|i| eval(x0 + (x1 - x0) * i as f64 / SEED_LATTICE as f64))
            .collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSeed("seed is not finite on its interval".into()));
        }
        if vals.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSeed("seed is not strictly increasing".into()));
        }
        Ok(Self { x0, x1, eval, declared_q: None })
    }

    /// `a0(x) = x`.
    pub fn linear(x0: f64, x1: f64) -> Result<Self> {
        Self::new(x0, x1, Arc::new(|x| x))
    }

    /// Monotone-cubic interpolant through `(x, a0)` samples spanning the interval.
    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        let spline = MonotoneCubic::new(samples)?;
        let (x0, x1) = (spline.lo(), spline.hi());
        if samples.windows(2).any(|w| !(w[1].1 > w[0].1)) {
            return Err(Error::InvalidSeed("tabulated seed values must be strictly increasing".into()));
        }
        Self::new(x0, x1, Arc::new(move |x| spline.eval(x)))
    }

    /// Declares the jump `Q`; `extend_seed` checks it against `a0(x1) - a0(x0)`.
    pub fn with_q(mut self, q: f64) -> Self {
        self.declared_q = Some(q);
        self
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.x0, self.x1, true, false).expect("validated in constructor")
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    /// `a0(x1) - a0(x0)`.
    pub fn jump(&self) -> f64 {
        self.eval(self.x1) - self.eval(self.x0)
    }

    pub fn declared_q(&self) -> Option<f64> {
        self.declared_q
    }
}

/// How an [`AbelSolution`] was obtained.
#[derive(Debug, Clone)]
pub enum AbelOrigin {
    Seeded(Arc<SeedFunction>),
    ClosedForm(ProfileKind),
    Schroder { s: f64 },
    General,
}

/// A solution `a` of `a(T(x)) = a(x) + Q`.
#[derive(Clone)]
pub struct AbelSolution {
    map: ForwardMap,
    q: f64,
    origin: AbelOrigin,
    eval: FallibleFn,
    inverse: Option<RealFn>,
    domain: Interval,
    strictly_increasing: bool,
}

impl fmt::Debug for AbelSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AbelSolution")
            .field("map", &self.map.label())
            .field("q", &self.q)
            .field("origin", &self.origin)
            .field("domain", &self.domain)
            .field("strictly_increasing", &self.strictly_increasing)
            .finish()
    }
}

impl AbelSolution {
    pub fn new(
        map: ForwardMap,
        q: f64,
        origin: AbelOrigin,
        eval: FallibleFn,
        inverse: Option<RealFn>,
        domain: Interval,
        strictly_increasing: bool,
    ) -> Self {
        Self { map, q, origin, eval, inverse, domain, strictly_increasing }
    }

    pub fn map(&self) -> &ForwardMap {
        &self.map
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn origin(&self) -> &AbelOrigin {
        &self.origin
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.strictly_increasing
    }

    pub fn seed(&self) -> Option<&SeedFunction> {
        match &self.origin {
            AbelOrigin::Seeded(s) => Some(s),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        (self.eval)(x)
    }

    pub fn eval_fn(&self) -> FallibleFn {
        self.eval.clone()
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    /// `a^{-1}(v)`; NaN where undefined, `None` without an inverse.
    pub fn inverse(&self, v: f64) -> Option<f64> {
        self.inverse.as_ref().map(|g| g(v))
    }

    /// Branch `k` of a seeded extension, `a0(T^[-k](x)) + kQ`, without the
    /// interval membership test. Used for one-sided limits at `x_k`.
    pub fn branch_eval(&self, x: f64, k: i64) -> Result<f64> {
        let seed = self
            .seed()
            .ok_or_else(|| Error::InvalidSeed("branch evaluation needs a seeded solution".into()))?;
        let y = crate::charmap::iterate(&self.map, x, -k)?;
        Ok(seed.eval(y) + k as f64 * self.q)
    }

    /// As an [`crate::charmap::InvertibleFn`] on the map window, when an inverse exists.
    pub fn as_invertible(&self) -> Option<crate::charmap::InvertibleFn> {
        let inv = self.inverse.clone()?;
        let eval = self.eval.clone();
        Some(crate::charmap::InvertibleFn {
            eval: Arc::new(move |x| eval(x).unwrap_or(f64::NAN)),
            inverse: inv,
            domain: self.domain,
            window: self.map.window(),
        })
    }
}

/// Index `k` with `x` in `[T^[k](x0), T^[k+1](x0))`.
pub fn locate_interval(map: &ForwardMap, x0: f64, x: f64) -> Result<i64> {
    locate(map, x0, x).map(|(k, _)| k)
}

// Returns k and the boundary x_k.
fn locate(map: &ForwardMap, x0: f64, x: f64) -> Result<(i64, f64)> {
    if !x.is_finite() || !map.domain().contains_tol(x, MEMBERSHIP_TOL) {
        return Err(Error::OutOfDomain { x });
    }
    let mut xk = x0;
    let mut k: i64 = 0;
    if x >= x0 - tol_at(x0) {
        loop {
            if x == xk {
                return Ok((k, xk));
            }
            let next = map.apply(xk)?;
            if next - x > tol_at(next).min(0.5 * (next - xk)) {
                return Ok((k, xk));
            }
            if !(next > xk) || k as usize >= ITERATION_CAP {
                return Err(Error::IterationCapExceeded { cap: ITERATION_CAP });
            }
            xk = next;
            k += 1;
        }
    } else {
        let mut prev = map.apply_inverse(xk)?;
        loop {
            k -= 1;
            if x == prev {
                return Ok((k, prev));
            }
            let before = map.apply_inverse(prev).ok();
            let slack = before.map_or(tol_at(prev), |b| tol_at(prev).min(0.5 * (prev - b)));
            if x >= prev || prev - x < slack {
                return Ok((k, prev));
            }
            if !(prev < xk) || k.unsigned_abs() as usize >= ITERATION_CAP {
                return Err(Error::IterationCapExceeded { cap: ITERATION_CAP });
            }
            xk = prev;
            prev = before.ok_or(Error::OutOfDomain { x })?;
        }
    }
}

fn check_increasing_map(map: &ForwardMap) -> Result<()> {
    let (lo, hi) = map.window();
    let vals: Vec<f64> = (0..=SEED_LATTICE)
        .map(|i| map.eval(lo + (hi - lo) * i as f64 / SEED_LATTICE as f64))
        .collect();
    let finite: Vec<f64> = vals.into_iter().filter(|v| v.is_finite()).collect();
    if finite.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NotInvertible("forward map is not strictly increasing".into()));
    }
    Ok(())
}

/// Extends a seed on `[x0, T(x0))` to `a(x) = a0(T^[-k](x)) + kQ` for `x` in
/// `[x_k, x_{k+1})`, `x_k = T^[k](x0)`.
pub fn extend_seed(map: &ForwardMap, seed: SeedFunction) -> Result<AbelSolution> {
    let jump = seed.jump();
    let q = match seed.declared_q() {
        Some(q) => {
            if (q - jump).abs() > JUMP_TOL * q.abs().max(1.0) {
                return Err(Error::SeedJumpMismatch(format!(
                    "declared Q = {q} but a0(T(x0)) - a0(x0) = {jump}"
                )));
            }
            q
        }
        None => jump,
    };
    if let Some(order) = detect_involution(map, INVOLUTION_PROBE_ORDER) {
        return Err(Error::InvolutionObstruction { order, q });
    }
    check_increasing_map(map)?;

    let x0 = seed.x0();
    let t0 = map.apply(x0)?;
    if !(t0 > x0) {
        return Err(Error::InvalidSeed(format!("T(x0) = {t0} does not exceed x0 = {x0}")));
    }
    if (seed.x1() - t0).abs() > tol_at(t0) {
        return Err(Error::SeedJumpMismatch(format!(
            "seed interval ends at {} but T(x0) = {t0}",
            seed.x1()
        )));
    }

    let seed = Arc::new(seed);
    let a0x0 = seed.eval(x0);
    let eval: FallibleFn = {
        let (map, seed) = (map.clone(), seed.clone());
        Arc::new(move |x| {
            let (k, xk) = locate(&map, x0, x)?;
            if (x - xk).abs() <= tol_at(xk) {
                return Ok(a0x0 + k as f64 * q);
            }
            let y = crate::charmap::iterate(&map, x, -k)?;
            Ok(seed.eval(y) + k as f64 * q)
        })
    };
    let inverse: RealFn = {
        let (map, seed) = (map.clone(), seed.clone());
        let x1 = seed.x1();
        Arc::new(move |v| {
            let k = ((v - a0x0) / q).floor();
            if !k.is_finite() || k.abs() > ITERATION_CAP as f64 {
                return f64::NAN;
            }
            let target = v - k * q;
            let g = |y: f64| seed.eval(y);
            let h = 1e-7 * (x1 - x0);
            let gp = |y: f64| (seed.eval(y + h) - seed.eval(y - h)) / (2.0 * h);
            invert_increasing(&g, &gp, target, x0, x1)
                .and_then(|y| crate::charmap::iterate(&map, y, k as i64).ok())
                .unwrap_or(f64::NAN)
        })
    };
    let domain = map.domain();
    Ok(AbelSolution {
        map: map.clone(),
        q,
        origin: AbelOrigin::Seeded(seed),
        eval,
        inverse: Some(inverse),
        domain,
        strictly_increasing: q > 0.0,
    })
}

fn out_of(domain: Interval, x: f64) -> Result<()> {
    if domain.contains(x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain { x })
    }
}

/// Catalogued elementary Abel functions.
///
/// | kind | a(x) | Q |
/// |---|---|---|
/// | wedge | ln(b+ - x)/ln p | 1 |
/// | isosceles_triangle | piecewise affine, `a = x` on `[-tau, tau)` | 2 tau |
/// | hyperbolic_lens | artanh x | artanh(1/c) |
/// | hyperbolic_hump | arsinh x | 2 artanh tau |
/// | dai_hyperbola | Q nu x^2 / (4 r) | q |
/// | dai_hyperbola with d0 | (Q/2)(d0 x + r x^2/2) | q |
/// | parabolic_segment | log2(ln(1 - 2x)/ln(1 - 2c)) | 1 |
///
/// Slopes are taken relative to `nu`; the lens, hump and parabolic entries
/// exist only for `nu/scale = 1`.
pub fn closed_form_abel(kind: &str, params: &Params) -> Result<AbelSolution> {
    let profile = make_profile(kind, params)?;
    let kind = profile.kind();
    let nu = profile.nu();
    let unit = (profile.effective_nu() - 1.0).abs() <= 1e-15;
    let no_form = || Error::UnknownKind(format!("no closed-form Abel function for {kind} at nu/scale = {}", profile.effective_nu()));
    let map = build_forward_map(&profile)?;

    type Parts = (f64, FallibleFn, RealFn, Interval);
    let (q, eval, inverse, domain): Parts = match kind {
        ProfileKind::Wedge => {
            let tau = profile.param("tau").unwrap_or(0.0) / nu;
            let bp = profile.param("b_plus").unwrap_or(0.0);
            let lp = ((1.0 - tau) / (1.0 + tau)).ln();
            let dom = Interval::open(f64::NEG_INFINITY, bp);
            (
                1.0,
                Arc::new(move |x: f64| {
                    out_of(dom, x)?;
                    Ok((bp - x).ln() / lp)
                }),
                Arc::new(move |a: f64| bp - (a * lp).exp()),
                dom,
            )
        }
        ProfileKind::IsoscelesTriangle => {
            let tau = profile.param("tau").unwrap_or(0.0) / nu;
            let p = (1.0 - tau) / (1.0 + tau);
            let lp = p.ln();
            let dom = Interval::open(-1.0, 1.0);
            (
                2.0 * tau,
                Arc::new(move |x: f64| {
                    out_of(dom, x)?;
                    Ok(triangle_abel(tau, p, lp, x))
                }),
                Arc::new(move |a: f64| triangle_abel_inverse(tau, p, a)),
                dom,
            )
        }
        ProfileKind::HyperbolicLens if unit => {
            let c = profile.param("c").unwrap_or(2.0);
            let dom = Interval::open(-1.0, 1.0);
            (
                (1.0 / c).atanh(),
                Arc::new(move |x: f64| {
                    out_of(dom, x)?;
                    Ok(x.atanh())
                }),
                Arc::new(f64::tanh),
                dom,
            )
        }
        ProfileKind::HyperbolicHump if unit => {
            let tau = profile.param("tau").unwrap_or(0.5);
            (
                2.0 * tau.atanh(),
                Arc::new(|x: f64| Ok(x.asinh())),
                Arc::new(f64::sinh),
                Interval::real_line(),
            )
        }
        ProfileKind::DaiHyperbola => {
            let r = profile.param("r").unwrap_or(1.0);
            let q = profile.param("q").unwrap_or(4.0);
            match profile.param("d0") {
                Some(d0) => {
                    let dom = Interval::real_line();
                    (
                        q,
                        Arc::new(move |x: f64| {
                            out_of(dom, x)?;
                            Ok(0.5 * q * (d0 * x + 0.5 * r * x * x))
                        }),
                        Arc::new(move |a: f64| (-d0 + (d0 * d0 + 4.0 * r * a / q).sqrt()) / r),
                        dom,
                    )
                }
                None => {
                    let dom = Interval::real_line();
                    let k = q * nu / (4.0 * r);
                    (
                        q,
                        Arc::new(move |x: f64| {
                            out_of(dom, x)?;
                            Ok(k * x * x)
                        }),
                        Arc::new(move |a: f64| (a / k).sqrt()),
                        dom,
                    )
                }
            }
        }
        ProfileKind::ParabolicSegment if unit => {
            let c = profile.param("c").unwrap_or(0.25);
            let lc = (-2.0 * c).ln_1p();
            let dom = Interval::open(0.0, 0.5);
            (
                1.0,
                Arc::new(move |x: f64| {
                    out_of(dom, x)?;
                    Ok(((-2.0 * x).ln_1p() / lc).ln() / std::f64::consts::LN_2)
                }),
                Arc::new(move |a: f64| -(lc * a.exp2()).exp_m1() / 2.0),
                dom,
            )
        }
        _ => return Err(no_form()),
    };
    // the Dai quadratics are even about the singular abscissa
    let increasing = q > 0.0 && kind != ProfileKind::DaiHyperbola;
    Ok(AbelSolution {
        map,
        q,
        origin: AbelOrigin::ClosedForm(kind),
        eval,
        inverse: Some(inverse),
        domain,
        strictly_increasing: increasing,
    })
}

fn triangle_abel(tau: f64, p: f64, lp: f64, x: f64) -> f64 {
    if x >= tau {
        let n = (((1.0 - x) / (1.0 + tau)).ln() / lp).floor().max(1.0);
        1.0 + (x - 1.0) / p.powf(n) + 2.0 * tau * n
    } else if x >= -tau {
        x
    } else {
        let m = (((1.0 + x) / (1.0 - tau)).ln() / lp).ceil().max(1.0);
        -1.0 + (x + 1.0) / p.powf(m) - 2.0 * tau * m
    }
}

fn triangle_abel_inverse(tau: f64, p: f64, a: f64) -> f64 {
    let n = ((a + tau) / (2.0 * tau)).floor();
    if n >= 1.0 {
        1.0 + p.powf(n) * (a - 1.0 - 2.0 * tau * n)
    } else if n == 0.0 {
        a
    } else {
        let m = -n;
        -1.0 + p.powf(m) * (a + 1.0 + 2.0 * tau * m)
    }
}

/// `a(x) = ln f(x) / ln s` for a positive solution of `f(T(x)) = s f(x)`; `Q = 1`.
pub fn schroder_to_abel(f: RealFn, s: f64, map: &ForwardMap) -> Result<AbelSolution> {
    if !(s > 0.0) {
        return Err(Error::InvalidParams(format!("Schröder scale must be positive, got {s}")));
    }
    if (s - 1.0).abs() <= f64::EPSILON {
        return Err(Error::ScaleIsOne);
    }
    let (lo, hi) = map.window();
    let xs: Vec<f64> = (0..SWEEP_POINTS)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / SWEEP_POINTS as f64)
        .collect();
    let mut worst = 0.0f64;
    for &x in &xs {
        let fx = f(x);
        if !(fx > 0.0) {
            return Err(Error::NotPositive { x });
        }
        let t = match map.apply(x) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let r = (f(t) - s * fx).abs() / (s * fx).max(1.0);
        worst = worst.max(if r.is_finite() { r } else { f64::INFINITY });
    }
    if worst > JUMP_TOL {
        return Err(Error::NotSchroderSolution { max_residual: worst });
    }
    let ls = s.ln();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x).ln() / ls).collect();
    let increasing = vals.windows(2).all(|w| w[1] > w[0]);
    let g = f.clone();
    Ok(AbelSolution {
        map: map.clone(),
        q: 1.0,
        origin: AbelOrigin::Schroder { s },
        eval: Arc::new(move |x| {
            let fx = g(x);
            if fx > 0.0 {
                Ok(fx.ln() / ls)
            } else {
                Err(Error::NotPositive { x })
            }
        }),
        inverse: None,
        domain: map.domain(),
        strictly_increasing: increasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charmap::iterate;
    use crate::geometry::params;

    fn triangle_map() -> ForwardMap {
        build_forward_map(&make_profile("isosceles_triangle", &params(&[("tau", 0.35)])).unwrap()).unwrap()
    }

    fn lens_map() -> ForwardMap {
        build_forward_map(&make_profile("hyperbolic_lens", &params(&[("c", 2.0)])).unwrap()).unwrap()
    }

    fn triangle_linear() -> AbelSolution {
        let m = triangle_map();
        let seed = SeedFunction::linear(-0.35, m.eval(-0.35)).unwrap();
        extend_seed(&m, seed).unwrap()
    }

    #[test]
    fn triangle_extension_value() {
        let a = triangle_linear();
        assert!((a.q() - 0.7).abs() < 1e-15);
        let p: f64 = 0.65 / 1.35;
        let s_plus = 0.7 / 1.35;
        let pulled = (0.5 - s_plus) / p;
        assert!((pulled + 0.038_461_538_461_538).abs() < 1e-12);
        let expected = 0.7 + pulled;
        let v = a.eval(0.5).unwrap();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.661_538_461_538_461_5).abs() < 1e-12);
        // closed form with n = 1
        assert!((v - (1.0 + (0.5 - 1.0) / p + 0.7)).abs() < 1e-12);
        assert_eq!(a.eval(-0.35).unwrap(), -0.35);
    }

    #[test]
    fn locate_examples() {
        let m = triangle_map();
        assert_eq!(locate_interval(&m, -0.35, 0.5).unwrap(), 1);
        assert_eq!(locate_interval(&m, -0.35, -0.35).unwrap(), 0);
        let t0 = m.eval(-0.35);
        assert_eq!(locate_interval(&m, -0.35, t0).unwrap(), 1);
        assert_eq!(locate_interval(&m, -0.35, t0 - 1e-6).unwrap(), 0);
        assert_eq!(locate_interval(&m, -0.35, -0.5).unwrap(), -1);
        assert!(matches!(locate_interval(&m, -0.35, 1.0), Err(Error::IterationCapExceeded { .. })));
    }

    #[test]
    fn triangle_closed_form_matches_extension() {
        let a = triangle_linear();
        let c = closed_form_abel("isosceles_triangle", &params(&[("tau", 0.35)])).unwrap();
        for i in 1..200 {
            let x = -0.999 + 1.998 * i as f64 / 200.0;
            let (u, v) = (a.eval(x).unwrap(), c.eval(x).unwrap());
            assert!((u - v).abs() < 1e-9 * (1.0 + v.abs()), "{x}: {u} vs {v}");
            let back = c.inverse(v).unwrap();
            assert!((back - x).abs() < 1e-12);
            let back = a.inverse(u).unwrap();
            assert!((back - x).abs() < 1e-9);
        }
    }

    #[test]
    fn lens_extension_reproduces_artanh() {
        let m = lens_map();
        let seed = SeedFunction::new(0.0, 0.5, Arc::new(f64::atanh)).unwrap();
        let a = extend_seed(&m, seed).unwrap();
        for i in 0..200 {
            let x = -0.99 + 1.98 * i as f64 / 199.0;
            assert!((a.eval(x).unwrap() - x.atanh()).abs() < 1e-8);
        }
    }

    #[test]
    fn seed_errors() {
        let m = triangle_map();
        let short = SeedFunction::linear(-0.35, 0.3).unwrap();
        assert!(matches!(extend_seed(&m, short), Err(Error::SeedJumpMismatch(_))));
        let wrong_q = SeedFunction::linear(-0.35, 0.35).unwrap().with_q(0.9);
        assert!(matches!(extend_seed(&m, wrong_q), Err(Error::SeedJumpMismatch(_))));
        assert!(matches!(
            SeedFunction::new(0.0, 1.0, Arc::new(|x: f64| (x - 0.5).powi(2))),
            Err(Error::InvalidSeed(_))
        ));
        assert!(SeedFunction::tabulated(&[(0.0, 0.0), (0.5, 0.5), (1.0, 0.4)]).is_err());
    }

    #[test]
    fn involution_obstruction() {
        let pl = make_profile("involution_derived", &params(&[("family", 3.0), ("x0", 0.0), ("m", 2.0)])).unwrap();
        let m = build_forward_map(&pl).unwrap();
        let seed = SeedFunction::linear(-2.0, m.eval(-2.0)).unwrap();
        assert!(matches!(extend_seed(&m, seed), Err(Error::InvolutionObstruction { order: 2, .. })));
    }

    #[test]
    fn closed_form_examples() {
        let w = closed_form_abel("wedge", &params(&[("tau", 0.5), ("b_plus", 0.0)])).unwrap();
        assert!(w.eval(-1.0).unwrap().abs() < 1e-15);
        assert!((w.map().eval(-1.0) + 1.0 / 3.0).abs() < 1e-15);
        assert!((w.eval(-1.0 / 3.0).unwrap() - 1.0).abs() < 1e-15);

        let d = closed_form_abel("dai_hyperbola", &params(&[("r", 1.0), ("q", 4.0)])).unwrap();
        for x in [0.3, 1.0, 2.5, 7.0] {
            assert!((d.eval(x).unwrap() - x * x).abs() < 1e-15);
            let t = (4.0 + x * x).sqrt();
            assert!((d.eval(t).unwrap() - d.eval(x).unwrap() - 4.0).abs() < 1e-12);
        }

        let h = closed_form_abel("hyperbolic_hump", &params(&[("tau", 0.4)])).unwrap();
        let worst = (0..500)
            .map(|i| -5.0 + 10.0 * (i as f64 + 0.5) / 500.0)
            .map(|x| (h.eval(h.map().eval(x)).unwrap() - h.eval(x).unwrap() - h.q()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");

        assert!(matches!(closed_form_abel("semi_ellipse", &params(&[])), Err(Error::UnknownKind(_))));
        assert!(matches!(
            closed_form_abel("hyperbolic_lens", &params(&[("c", 2.0), ("nu", 2.0)])),
            Err(Error::UnknownKind(_))
        ));
    }

    #[test]
    fn closed_form_inverses() {
        let cases = [
            ("wedge", params(&[("tau", 0.5)])),
            ("hyperbolic_lens", params(&[("c", 2.0)])),
            ("hyperbolic_hump", params(&[("tau", 0.3)])),
            ("dai_hyperbola", params(&[("r", 1.0), ("q", 4.0)])),
            ("dai_hyperbola", params(&[("r", 2.0), ("d0", 1.0), ("q", 3.0)])),
            ("parabolic_segment", params(&[])),
        ];
        for (kind, p) in cases {
            let a = closed_form_abel(kind, &p).unwrap();
            let (lo, hi) = a.map().window();
            for i in 1..50 {
                let x = lo + (hi - lo) * i as f64 / 50.0;
                let v = a.eval(x).unwrap();
                assert!((a.inverse(v).unwrap() - x).abs() < 1e-9 * (1.0 + x.abs()), "{kind} at {x}");
            }
        }
    }

    #[test]
    fn dai_variant_sign() {
        let a = closed_form_abel("dai_hyperbola", &params(&[("r", 2.0), ("d0", 1.0), ("q", 3.0)])).unwrap();
        let prof = make_profile("dai_hyperbola", &params(&[("r", 2.0), ("d0", 1.0)])).unwrap();
        for i in 0..50 {
            let x = -0.4 + 0.1 * i as f64;
            let d = prof.d(x);
            let fed = a.eval(x + d).unwrap() - a.eval(x - d).unwrap();
            assert!((fed - 3.0).abs() < 1e-9, "{x}: {fed}");
        }
    }

    #[test]
    fn schroder_examples() {
        let m = lens_map();
        let r: RealFn = Arc::new(|x| (1.0 + x) / (1.0 - x));
        let s = r(0.5);
        assert!((s - 3.0).abs() < 1e-15);
        let a = schroder_to_abel(r.clone(), s, &m).unwrap();
        assert!(a.eval(0.0).unwrap().abs() < 1e-15);
        assert!((a.eval(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(schroder_to_abel(r.clone(), 1.0, &m), Err(Error::ScaleIsOne)));
        assert!(matches!(schroder_to_abel(r, 2.0, &m), Err(Error::NotSchroderSolution { .. })));
        let neg: RealFn = Arc::new(|x| x);
        assert!(matches!(schroder_to_abel(neg, 3.0, &m), Err(Error::NotPositive { .. })));

        let e: RealFn = Arc::new(|x: f64| x.atanh().exp());
        let q = 0.5f64.atanh();
        let a = schroder_to_abel(e, q.exp(), &m).unwrap();
        for x in [-0.7, 0.1, 0.8] {
            assert!((a.eval(x).unwrap() - x.atanh() / q).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_values_are_exact() {
        let m = build_forward_map(&make_profile("dai_hyperbola", &params(&[("r", 1.0)])).unwrap()).unwrap();
        let x0 = 0.5;
        let seed = SeedFunction::linear(x0, m.eval(x0)).unwrap();
        let a = extend_seed(&m, seed).unwrap();
        let q = a.q();
        let mut xk = x0;
        for k in 0..=ITERATION_CAP as i64 {
            if k % 997 == 0 || k < 30 {
                assert_eq!(a.eval(xk).unwrap(), x0 + k as f64 * q);
            }
            if k < ITERATION_CAP as i64 {
                xk = m.eval(xk);
            }
        }
        assert_eq!(iterate(&m, x0, 3).unwrap(), m.eval(m.eval(m.eval(x0))));
    }
}
