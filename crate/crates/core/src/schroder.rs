//! Standing-wave solutions `f(T(x)) = f(x)`.
//!
//! Built by composing periodic functions with Abel solutions, by
//! post-composition and pointwise closure, from Barcilon's semi-ellipse
//! reduction, and from symmetric functions of involution orbits.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abel::{AbelOrigin, AbelSolution, FallibleFn};
use crate::charmap::ForwardMap;
use crate::error::{Error, Result};
use crate::geometry::{Interval, RealFn};

/// Relative tolerance for period compatibility.
pub const PERIOD_TOL: f64 = 1e-9;

/// Domain tolerance for wave-profile evaluation.
pub const EXTENSION_TOL: f64 = 1e-12;

const INVOLUTION_TOL: f64 = 1e-10;
const INVOLUTION_PROBES: usize = 100;
const CYCLIC_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicKind {
    Cosine,
    Sine,
    TriangleWave,
    Tabulated,
}

/// `amplitude * base(2 pi x / period + phase)`.
#[derive(Debug, Clone)]
pub struct PeriodicFunction {
    kind: PeriodicKind,
    period: f64,
    amplitude: f64,
    phase: f64,
    table: Option<Arc<Table>>,
}

#[derive(Debug)]
struct Table {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

/// Even, `2 pi`-periodic triangle wave with `tw(0) = 1`, `tw(pi) = -1`.
pub fn triangle_wave(u: f64) -> f64 {
    let w = (u + PI).rem_euclid(TAU) - PI;
    1.0 - 2.0 * w.abs() / PI
}

impl PeriodicFunction {
    fn analytic(kind: PeriodicKind, period: f64, amplitude: f64, phase: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParams(format!("period must be positive, got {period}")));
        }
        if !amplitude.is_finite() || !phase.is_finite() {
            return Err(Error::InvalidParams("amplitude and phase must be finite".into()));
        }
        Ok(Self { kind, period, amplitude, phase, table: None })
    }

    pub fn cosine(period: f64) -> Result<Self> {
        Self::analytic(PeriodicKind::Cosine, period, 1.0, 0.0)
    }

    pub fn sine(period: f64) -> Result<Self> {
        Self::analytic(PeriodicKind::Sine, period, 1.0, 0.0)
    }

    pub fn triangle_wave(period: f64) -> Result<Self> {
        Self::analytic(PeriodicKind::TriangleWave, period, 1.0, 0.0)
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    /// Piecewise-linear interpolation of one period of samples.
    ///
    /// With `period = None` the samples span exactly one period and the first
    /// and last values must agree. With an explicit period the samples cover
    /// `[x_first, x_first + period)` and the last sample joins the first one
    /// shifted by a period.
    pub fn tabulated(samples: &[(f64, f64)], period: Option<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParams("tabulated periodic function needs two samples".into()));
        }
        if samples.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidParams("tabulated samples must be finite".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParams("tabulated abscissae must be strictly increasing".into()));
        }
        let (first, last) = (samples[0], samples[samples.len() - 1]);
        let span = last.0 - first.0;
        let period = match period {
            None => {
                if (first.1 - last.1).abs() > 1e-12 {
                    return Err(Error::InvalidParams(
                        "samples spanning one period must start and end at the same value".into(),
                    ));
                }
                span
            }
            Some(p) if p > span => p,
            Some(p) => {
                return Err(Error::InvalidParams(format!("period {p} must exceed the sample span {span}")));
            }
        };
        let table = Table {
            xs: samples.iter().map(|s| s.0).collect(),
            ys: samples.iter().map(|s| s.1).collect(),
        };
        Ok(Self {
            kind: PeriodicKind::Tabulated,
            period,
            amplitude: 1.0,
            phase: 0.0,
            table: Some(Arc::new(table)),
        })
    }

    pub fn kind(&self) -> PeriodicKind {
        self.kind
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = TAU * x / self.period + self.phase;
        let base = match self.kind {
            PeriodicKind::Cosine => u.cos(),
            PeriodicKind::Sine => u.sin(),
            PeriodicKind::TriangleWave => triangle_wave(u),
            PeriodicKind::Tabulated => self.table_eval(x + self.phase * self.period / TAU),
        };
        self.amplitude * base
    }

    fn table_eval(&self, x: f64) -> f64 {
        let t = self.table.as_ref().expect("tabulated kind carries a table");
        let x0 = t.xs[0];
        let u = x0 + (x - x0).rem_euclid(self.period);
        let n = t.xs.len();
        let i = t.xs.partition_point(|&xi| xi <= u);
        let (xa, ya, xb, yb) = if i >= n {
            (t.xs[n - 1], t.ys[n - 1], x0 + self.period, t.ys[0])
        } else {
            let i = i.max(1);
            (t.xs[i - 1], t.ys[i - 1], t.xs[i], t.ys[i])
        };
        if xb == xa {
            return ya;
        }
        ya + (yb - ya) * (u - xa) / (xb - xa)
    }

    /// `sup |P'|`.
    pub fn derivative_bound(&self) -> Option<f64> {
        let a = self.amplitude.abs();
        Some(match self.kind {
            PeriodicKind::Cosine | PeriodicKind::Sine => a * TAU / self.period,
            PeriodicKind::TriangleWave => a * 4.0 / self.period,
            PeriodicKind::Tabulated => {
                let t = self.table.as_ref()?;
                let n = t.xs.len();
                let mut m = t
                    .xs
                    .windows(2)
                    .zip(t.ys.windows(2))
                    .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
                    .fold(0.0, f64::max);
                let gap = t.xs[0] + self.period - t.xs[n - 1];
                if gap > 0.0 {
                    m = m.max(((t.ys[0] - t.ys[n - 1]) / gap).abs());
                }
                a * m
            }
        })
    }

    pub fn as_fn(&self) -> RealFn {
        let p = self.clone();
        Arc::new(move |x| p.eval(x))
    }
}

fn one() -> f64 {
    1.0
}

/// JSON form of a periodic function, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PeriodicSpec {
    Cosine {
        period: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    Sine {
        period: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    TriangleWave {
        period: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    Tabulated {
        samples: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        period: Option<f64>,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl PeriodicSpec {
    pub fn build(&self) -> Result<PeriodicFunction> {
        match self {
            PeriodicSpec::Cosine { period, amplitude, phase } => {
                PeriodicFunction::analytic(PeriodicKind::Cosine, *period, *amplitude, *phase)
            }
            PeriodicSpec::Sine { period, amplitude, phase } => {
                PeriodicFunction::analytic(PeriodicKind::Sine, *period, *amplitude, *phase)
            }
            PeriodicSpec::TriangleWave { period, amplitude, phase } => {
                PeriodicFunction::analytic(PeriodicKind::TriangleWave, *period, *amplitude, *phase)
            }
            PeriodicSpec::Tabulated { samples, period, amplitude, phase } => {
                let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s[0], s[1])).collect();
                Ok(PeriodicFunction::tabulated(&pts, *period)?
                    .with_amplitude(*amplitude)
                    .with_phase(*phase))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    PeriodicComposition,
    Postcomposed,
    Involution,
    Barcilon,
    Custom,
}

/// A solution `f` of `f(x + d/nu) - f(x - d/nu) = flux` on a recorded domain.
#[derive(Clone)]
pub struct WaveProfileFunction {
    domain: Interval,
    eval: FallibleFn,
    provenance: Provenance,
    flux: f64,
}

impl fmt::Debug for WaveProfileFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveProfileFunction")
            .field("domain", &self.domain)
            .field("provenance", &self.provenance)
            .field("flux", &self.flux)
            .finish()
    }
}

impl WaveProfileFunction {
    pub fn new(domain: Interval, eval: FallibleFn, provenance: Provenance, flux: f64) -> Self {
        Self { domain, eval, provenance, flux }
    }

    pub fn from_fn(domain: Interval, eval: RealFn, provenance: Provenance, flux: f64) -> Self {
        Self::new(domain, Arc::new(move |x| Ok(eval(x))), provenance, flux)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn flux(&self) -> f64 {
        self.flux
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || !self.domain.contains_tol(x, EXTENSION_TOL) {
            return Err(Error::OutOfExtensionDomain { x });
        }
        (self.eval)(x)
    }

    fn shared(&self) -> Arc<WaveProfileFunction> {
        Arc::new(self.clone())
    }
}

fn period_multiple(period: f64, q: f64) -> Result<u64> {
    let n = q.abs() / period;
    let r = n.round();
    if r >= 1.0 && (n - r).abs() <= PERIOD_TOL * r {
        Ok(r as u64)
    } else {
        Err(Error::PeriodMismatch { period, q })
    }
}

/// `f = P ∘ a`; `|Q|` must be a positive integer multiple of the period of `P`.
pub fn compose_periodic(a: &AbelSolution, p: &PeriodicFunction) -> Result<WaveProfileFunction> {
    period_multiple(p.period(), a.q())?;
    let ae = a.eval_fn();
    let p = p.clone();
    Ok(WaveProfileFunction::new(
        a.domain(),
        Arc::new(move |x| ae(x).map(|v| p.eval(v))),
        Provenance::PeriodicComposition,
        0.0,
    ))
}

/// `a_gen = a/Q + P(a/Q)` with `P` of period 1; solves the Abel equation with `Q = 1`.
pub fn general_abel_solution(a: &AbelSolution, p: &PeriodicFunction) -> Result<AbelSolution> {
    if (p.period() - 1.0).abs() > PERIOD_TOL {
        return Err(Error::PeriodMismatch { period: p.period(), q: 1.0 });
    }
    let q = a.q();
    let ae = a.eval_fn();
    let pp = p.clone();
    let increasing = a.is_strictly_increasing() && q > 0.0 && p.derivative_bound().is_some_and(|b| b < 1.0);
    Ok(AbelSolution::new(
        a.map().clone(),
        1.0,
        AbelOrigin::General,
        Arc::new(move |x| {
            let u = ae(x)? / q;
            Ok(u + pp.eval(u))
        }),
        None,
        a.domain(),
        increasing,
    ))
}

/// `F ∘ f` for a standing-wave `f`.
pub fn postcompose(f: &WaveProfileFunction, outer: RealFn) -> WaveProfileFunction {
    let inner = f.shared();
    WaveProfileFunction::new(
        f.domain(),
        Arc::new(move |x| inner.eval(x).map(|v| outer(v))),
        Provenance::Postcomposed,
        0.0,
    )
}

fn intersect(a: Interval, b: Interval) -> Result<Interval> {
    let (lo, lo_closed) = if a.lo > b.lo {
        (a.lo, a.lo_closed)
    } else if b.lo > a.lo {
        (b.lo, b.lo_closed)
    } else {
        (a.lo, a.lo_closed && b.lo_closed)
    };
    let (hi, hi_closed) = if a.hi < b.hi {
        (a.hi, a.hi_closed)
    } else if b.hi < a.hi {
        (b.hi, b.hi_closed)
    } else {
        (a.hi, a.hi_closed && b.hi_closed)
    };
    Interval::new(lo, hi, lo_closed, hi_closed)
}

fn combine(
    f0: &WaveProfileFunction,
    f1: &WaveProfileFunction,
    op: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
) -> Result<WaveProfileFunction> {
    let domain = intersect(f0.domain(), f1.domain())?;
    let (g0, g1) = (f0.shared(), f1.shared());
    Ok(WaveProfileFunction::new(
        domain,
        Arc::new(move |x| Ok(op(g0.eval(x)?, g1.eval(x)?))),
        Provenance::Postcomposed,
        0.0,
    ))
}

/// `min(f0, f1)`.
pub fn pointwise_min(f0: &WaveProfileFunction, f1: &WaveProfileFunction) -> Result<WaveProfileFunction> {
    combine(f0, f1, f64::min)
}

/// `(1 - t) f0 + t f1` for `t` in `[0, 1]`.
pub fn convex_combination(
    f0: &WaveProfileFunction,
    f1: &WaveProfileFunction,
    t: f64,
) -> Result<WaveProfileFunction> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParams(format!("convex weight must lie in [0, 1], got {t}")));
    }
    combine(f0, f1, move |a, b| (1.0 - t) * a + t * b)
}

/// Semi-ellipse mode `(m, k)`: `nu = cot(m pi/k)` and `f(X) = P(arccos(X cos(m pi/k)))`.
///
/// `P` must have a period dividing `2 m pi/k`; `P = cos(k .)` gives the
/// Chebyshev polynomial `T_k(X cos(m pi/k))`.
pub fn barcilon_solution(m: i64, k: i64, p: &PeriodicFunction) -> Result<(f64, WaveProfileFunction)> {
    if m <= 0 || k <= 0 || 2 * m >= k {
        return Err(Error::InvalidModeNumbers { m, k });
    }
    let theta = m as f64 * PI / k as f64;
    period_multiple(p.period(), 2.0 * theta)?;
    let nu = 1.0 / theta.tan();
    let c = theta.cos();
    let reach = 1.0 / c;
    let p = p.clone();
    let f = WaveProfileFunction::from_fn(
        Interval::closed(-reach, reach),
        Arc::new(move |x| p.eval((x * c).clamp(-1.0, 1.0).acos())),
        Provenance::Barcilon,
        0.0,
    );
    Ok((nu, f))
}

/// A map whose `order`-fold composition is the identity.
#[derive(Clone)]
pub struct Involution {
    order: usize,
    eval: RealFn,
    domain: Interval,
    window: (f64, f64),
}

impl fmt::Debug for Involution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Involution")
            .field("order", &self.order)
            .field("domain", &self.domain)
            .field("window", &self.window)
            .finish()
    }
}

fn probes(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..INVOLUTION_PROBES).map(move |i| lo + (hi - lo) * (i as f64 + 0.5) / INVOLUTION_PROBES as f64)
}

fn deviation(x: f64, y: f64) -> f64 {
    let d = (y - x).abs() / x.abs().max(1.0);
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

impl Involution {
    /// Verifies the order on 100 probes of `window`.
    pub fn new(order: usize, eval: RealFn, domain: Interval, window: (f64, f64)) -> Result<Self> {
        if order < 2 {
            return Err(Error::NotInvolution { order, max_deviation: f64::INFINITY });
        }
        let worst = probes(window.0, window.1)
            .map(|x| {
                let y = (0..order).fold(x, |y, _| eval(y));
                deviation(x, y)
            })
            .fold(0.0, f64::max);
        if worst > INVOLUTION_TOL {
            return Err(Error::NotInvolution { order, max_deviation: worst });
        }
        Ok(Self { order, eval, domain, window })
    }

    /// `1/x` on `x < 0`.
    pub fn reciprocal() -> Self {
        Self::new(2, Arc::new(|x| 1.0 / x), Interval::open(f64::NEG_INFINITY, 0.0), (-4.0, -1.0))
            .expect("1/x is an involution")
    }

    /// `PL(x0, m)`.
    pub fn piecewise_linear(x0: f64, m: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::InvalidParams(format!("PL slope must be positive, got {m}")));
        }
        Self::new(
            2,
            Arc::new(move |x| crate::charmap::piecewise_linear_involution(x0, m, x)),
            Interval::real_line(),
            (x0 - 3.0, x0 + 3.0),
        )
    }

    /// `(x0 - x)/(1 + b x)` on `x < -1/b`.
    pub fn fractional_linear(x0: f64, b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidParams(format!("b must be positive, got {b}")));
        }
        let edge = -1.0 / b;
        Self::new(
            2,
            Arc::new(move |x| (x0 - x) / (1.0 + b * x)),
            Interval::open(f64::NEG_INFINITY, edge),
            (edge - 4.0, edge - 0.25),
        )
    }

    /// `sqrt(2 b^2 - x^2)` on `[0, sqrt(2) b]`.
    pub fn ellipse_portion(b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidParams(format!("b must be positive, got {b}")));
        }
        let r = 2f64.sqrt() * b;
        Self::new(
            2,
            Arc::new(move |x: f64| (2.0 * b * b - x * x).max(0.0).sqrt()),
            Interval::closed(0.0, r),
            (0.0, r),
        )
    }

    /// `sign(x) sqrt(1 - x^2)` on `[-1, 1]`.
    pub fn quarter_circle() -> Self {
        Self::new(
            2,
            Arc::new(|x: f64| x.signum() * (1.0 - x * x).max(0.0).sqrt()),
            Interval::closed(-1.0, 1.0),
            (-1.0, 1.0),
        )
        .expect("quarter circle is an involution")
    }

    /// `1/(1 - x)`, of order 3.
    pub fn order_three() -> Self {
        Self::new(3, Arc::new(|x| 1.0 / (1.0 - x)), Interval::real_line(), (1.5, 10.0))
            .expect("1/(1-x) has order 3")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    /// `(x, inv(x), ..., inv^[order-1](x))`.
    pub fn orbit(&self, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.order);
        let mut y = x;
        for _ in 0..self.order {
            out.push(y);
            y = self.eval(y);
        }
        out
    }
}

pub type SymmetricFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `f(x) = S(x, inv(x), ..., inv^[k-1](x))` for cyclically invariant `S`.
pub fn involution_solution(invol: &Involution, s: SymmetricFn) -> Result<WaveProfileFunction> {
    let k = invol.order();
    let (lo, hi) = invol.window();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0.0f64;
    for _ in 0..CYCLIC_SAMPLES {
        let args: Vec<f64> = (0..k).map(|_| rng.gen_range(lo..=hi)).collect();
        let base = s(&args);
        for r in 1..k {
            let mut rotated = args.clone();
            rotated.rotate_left(r);
            worst = worst.max(deviation(base, s(&rotated)));
        }
    }
    if worst > INVOLUTION_TOL {
        return Err(Error::NotCyclicInvariant { max_deviation: worst });
    }
    let inv = invol.clone();
    Ok(WaveProfileFunction::from_fn(
        invol.domain(),
        Arc::new(move |x| s(&inv.orbit(x))),
        Provenance::Involution,
        0.0,
    ))
}

/// Smallest `k <= max_order` with `T^[k] = id` on 100 probes of the map
/// window; the identity map (order 1) reports `None`.
pub fn detect_involution(map: &ForwardMap, max_order: usize) -> Option<usize> {
    let (lo, hi) = map.window();
    let xs: Vec<f64> = probes(lo, hi).collect();
    let mut ys = xs.clone();
    for k in 1..=max_order {
        for y in ys.iter_mut() {
            *y = map.eval(*y);
        }
        let worst = xs.iter().zip(&ys).map(|(&x, &y)| deviation(x, y)).fold(0.0, f64::max);
        if worst <= INVOLUTION_TOL {
            return if k == 1 { None } else { Some(k) };
        }
    }
    None
}
