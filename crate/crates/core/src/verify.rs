//! Residual sweeps and the aggregate verification suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abel::AbelSolution;
use crate::charmap::{iterate, reflection_identity_residual, ForwardMap, MapForm};
use crate::construct::{build, Construction, SolutionSpec};
use crate::error::{Error, Result};
use crate::geometry::{DepthProfile, ProfileSpec};
use crate::schroder::{PeriodicSpec, WaveProfileFunction};
use crate::wavefield::{
    boundary_residual, detect_parity, extend_field, parity_check, Location, ResidualReport,
};

/// Tolerance for constructions built from closed-form maps.
pub const CLOSED_FORM_TOL: f64 = 1e-9;
/// Tolerance for constructions going through numeric inversion.
pub const NUMERIC_TOL: f64 = 1e-6;
/// Tolerance on one-sided limit gaps at orbit boundaries.
pub const CONTINUITY_TOL: f64 = 1e-6;
/// Tolerance on the symmetry rules of the stream function.
pub const PARITY_TOL: f64 = 1e-12;

const DEFAULT_SWEEP: usize = 500;
const REFLECTION_SAMPLES: usize = 100;
const CONTINUITY_RANGE: i64 = 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Midpoints of `n` equal cells.
    #[default]
    Uniform,
    ChebyshevNodes,
    /// Uniform draws from ChaCha8 seeded with `seed`.
    RandomSeeded,
}

/// Sample placement over `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default)]
    pub seed: u64,
}

fn default_n() -> usize {
    DEFAULT_SWEEP
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { lo: None, hi: None, n: DEFAULT_SWEEP, placement: Placement::Uniform, seed: 0 }
    }
}

impl SweepSpec {
    pub fn new(lo: f64, hi: f64, n: usize, placement: Placement, seed: u64) -> Self {
        Self { lo: Some(lo), hi: Some(hi), n, placement, seed }
    }

    pub fn uniform(lo: f64, hi: f64, n: usize) -> Self {
        Self::new(lo, hi, n, Placement::Uniform, 0)
    }

    /// Fills missing bounds from `window`.
    pub fn over(&self, window: (f64, f64)) -> Self {
        Self { lo: self.lo.or(Some(window.0)), hi: self.hi.or(Some(window.1)), ..*self }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        let (lo, hi) = match (self.lo, self.hi) {
            (Some(lo), Some(hi)) if lo.is_finite() && hi.is_finite() && lo < hi => (lo, hi),
            _ => return Err(Error::InvalidParams(format!("sweep needs finite lo < hi, got {self:?}"))),
        };
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("sweep needs n >= 2, got {}", self.n)));
        }
        let n = self.n;
        Ok(match self.placement {
            Placement::Uniform => (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect(),
            Placement::ChebyshevNodes => (0..n)
                .map(|i| {
                    let t = ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
                    0.5 * (lo + hi) - 0.5 * (hi - lo) * t
                })
                .collect(),
            Placement::RandomSeeded => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..n).map(|_| rng.gen_range(lo..hi)).collect()
            }
        })
    }
}

/// `|f(x + d/nu) - f(x - d/nu) - Q|` over the sweep.
pub fn fed_residual_sweep(
    f: &WaveProfileFunction,
    profile: &DepthProfile,
    q: f64,
    spec: &SweepSpec,
) -> Result<ResidualReport> {
    let nu = profile.nu();
    let items = spec
        .over(profile.window())
        .points()?
        .into_iter()
        .map(|x| {
            let s = profile.d(x) / nu;
            Ok((Location { x, z: None }, f.eval(x + s)? - f.eval(x - s)? - q))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::from_residuals(items))
}

/// `|g(T(x)) - g(x) - Q|` over the sweep.
pub fn fet_residual_sweep(
    g: &dyn Fn(f64) -> Result<f64>,
    map: &ForwardMap,
    q: f64,
    spec: &SweepSpec,
) -> Result<ResidualReport> {
    let items = spec
        .over(map.window())
        .points()?
        .into_iter()
        .map(|x| {
            let t = map.apply(x).map_err(|_| Error::OutOfExtensionDomain { x })?;
            Ok((Location { x, z: None }, g(t)? - g(x)? - q))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::from_residuals(items))
}

/// One line of a [`SuiteReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub report: Option<ResidualReport>,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SuiteEntry {
    pub fn from_report(name: impl Into<String>, report: Result<ResidualReport>, tolerance: f64) -> Self {
        let name = name.into();
        match report {
            Ok(r) => Self { passed: r.passes(tolerance), report: Some(r), tolerance, name, error: None },
            Err(e) => Self { name, report: None, tolerance, passed: false, error: Some(e.to_string()) },
        }
    }
}

/// Gaps between the one-sided limits of a seeded extension at the orbit
/// boundaries `x_k`, `|k| <= k_range`.
///
/// The left limit at `x_k` is branch `k - 1` evaluated at `x_k`, the right
/// limit is branch `k`. Boundaries that collapse onto a fixed point in
/// floating point end the walk in that direction.
pub fn continuity_check(a: &AbelSolution, k_range: i64) -> Result<SuiteEntry> {
    let seed = a
        .seed()
        .ok_or_else(|| Error::InvalidSeed("continuity check needs a seeded extension".into()))?;
    let map = a.map();
    let x0 = seed.x0();
    let mut items = Vec::new();
    for dir in [1i64, -1] {
        let mut prev = x0;
        let start: i64 = if dir == 1 { 0 } else { -1 };
        let mut k = start;
        while k.abs() <= k_range {
            let xk = iterate(map, x0, k)?;
            if k != start && xk == prev {
                break;
            }
            let left = a.branch_eval(xk, k - 1)?;
            let right = a.branch_eval(xk, k)?;
            items.push((Location { x: xk, z: None }, left - right));
            prev = xk;
            k += dir;
        }
    }
    let report = ResidualReport::from_residuals(items);
    Ok(SuiteEntry {
        name: "continuity".into(),
        passed: report.passes(CONTINUITY_TOL),
        report: Some(report),
        tolerance: CONTINUITY_TOL,
        error: None,
    })
}

/// One verification case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub name: String,
    pub profile: ProfileSpec,
    pub solution: SolutionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(default)]
    pub cases: Vec<CaseSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
    pub all_passed: bool,
}

fn reflection_report(profile: &DepthProfile, map: &ForwardMap, seed: u64) -> Result<ResidualReport> {
    let (lo, hi) = map.window();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items = (0..REFLECTION_SAMPLES)
        .map(|_| {
            let x = rng.gen_range(lo..hi);
            Ok((Location { x, z: None }, reflection_identity_residual(profile, map, x)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::from_residuals(items))
}

fn parity_report(c: &Construction) -> Result<ResidualReport> {
    let field = extend_field(&c.f, c.nu())?;
    let (lo, hi) = c.profile.window();
    let r = lo.abs().min(hi.abs());
    let parity = if lo < 0.0 && hi > 0.0 {
        detect_parity(&c.f, r, CLOSED_FORM_TOL)
    } else {
        crate::wavefield::Parity::Neither
    };
    parity_check(&field, &c.profile, parity, 40)
}

/// All checks of one case, named `case:check`.
pub fn run_case(case: &CaseSpec) -> Vec<SuiteEntry> {
    let name = |check: &str| format!("{}:{check}", case.name);
    let c = match build(&case.profile, &case.solution) {
        Ok(c) => c,
        Err(e) => {
            return vec![SuiteEntry {
                name: name("build"),
                report: None,
                tolerance: 0.0,
                passed: false,
                error: Some(e.to_string()),
            }]
        }
    };
    let numeric = c.map.form() == MapForm::Numeric;
    let tol = case.tolerance.unwrap_or(if numeric { NUMERIC_TOL } else { CLOSED_FORM_TOL });
    let sweep = case.sweep.unwrap_or_default();
    let q = c.f.flux();
    let f = c.f.clone();

    let mut entries = vec![
        SuiteEntry::from_report(name("fet"), fet_residual_sweep(&|x| f.eval(x), &c.map, q, &sweep), tol),
        SuiteEntry::from_report(name("fed"), fed_residual_sweep(&c.f, &c.profile, q, &sweep), tol),
        SuiteEntry::from_report(
            name("boundary"),
            extend_field(&c.f, c.nu()).and_then(|field| boundary_residual(&field, &c.profile, sweep.n.max(2))),
            tol,
        ),
        SuiteEntry::from_report(
            name("reflection"),
            reflection_report(&c.profile, &c.map, sweep.seed),
            if numeric { NUMERIC_TOL } else { CLOSED_FORM_TOL },
        ),
        SuiteEntry::from_report(name("parity"), parity_report(&c), PARITY_TOL),
    ];
    if let Some(a) = c.abel.as_ref().filter(|a| a.seed().is_some()) {
        let mut e = continuity_check(a, CONTINUITY_RANGE).unwrap_or_else(|err| SuiteEntry {
            name: String::new(),
            report: None,
            tolerance: CONTINUITY_TOL,
            passed: false,
            error: Some(err.to_string()),
        });
        e.name = name("continuity");
        entries.push(e);
    }
    entries
}

/// Runs every case concurrently; entries are ordered by name.
pub fn run_suite(config: &SuiteConfig) -> SuiteReport {
    let mut entries: Vec<SuiteEntry> = config.cases.par_iter().flat_map(run_case).collect();
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    let all_passed = entries.iter().all(|e| e.passed);
    SuiteReport { entries, all_passed }
}

fn case(name: &str, profile: ProfileSpec, solution: SolutionSpec) -> CaseSpec {
    CaseSpec { name: name.into(), profile, solution, sweep: None, tolerance: None }
}

fn seed(x0: f64) -> Option<crate::construct::SeedSpec> {
    seed_with(x0, crate::construct::SeedForm::Linear)
}

fn seed_with(x0: f64, form: crate::construct::SeedForm) -> Option<crate::construct::SeedSpec> {
    Some(crate::construct::SeedSpec {
        x0: Some(x0),
        form,
        samples: None,
        q: None,
    })
}

fn cosine(period: f64) -> PeriodicSpec {
    PeriodicSpec::Cosine { period, amplitude: 1.0, phase: 0.0 }
}

/// The bundled catalog suite.
pub fn default_suite() -> SuiteConfig {
    use crate::construct::{OuterSpec, SymmetricSpec};
    use SolutionSpec::*;
    let lens_q = 0.5f64.atanh();
    let closed = || Abel { seed: None };
    let cases = vec![
        case("wedge_abel", ProfileSpec::new("wedge", &[("tau", 0.5)], 1.0), closed()),
        case("triangle_abel", ProfileSpec::new("isosceles_triangle", &[("tau", 0.35)], 1.0), closed()),
        case("lens_abel", ProfileSpec::new("hyperbolic_lens", &[("c", 2.0)], 1.0), closed()),
        case("hump_abel", ProfileSpec::new("hyperbolic_hump", &[("tau", 0.4)], 1.0), closed()),
        case("dai_flux", ProfileSpec::new("dai_hyperbola", &[("r", 1.0), ("q", 4.0)], 1.0), closed()),
        case(
            "dai_shifted_flux",
            ProfileSpec::new("dai_hyperbola", &[("r", 2.0), ("d0", 1.0), ("q", 3.0)], 1.0),
            closed(),
        ),
        case("parabolic_abel", ProfileSpec::new("parabolic_segment", &[], 1.0), closed()),
        case(
            "triangle_fig1",
            ProfileSpec::new("isosceles_triangle", &[("tau", 0.35)], 1.0),
            PeriodicComposition { seed: seed(-0.35), periodic: cosine(0.7), postcompose: None, perturbation: None },
        ),
        case(
            "lens_fig2",
            ProfileSpec::new("hyperbolic_lens", &[("c", 2.0)], 1.0),
            PeriodicComposition {
                seed: None,
                periodic: PeriodicSpec::Sine { period: lens_q, amplitude: 1.0, phase: 0.0 },
                postcompose: None,
                perturbation: None,
            },
        ),
        case(
            "lens_seeded_squared",
            ProfileSpec::new("hyperbolic_lens", &[("c", 2.0)], 1.0),
            PeriodicComposition {
                seed: seed(0.0),
                periodic: cosine(0.5),
                postcompose: Some(OuterSpec::Square),
                perturbation: None,
            },
        ),
        case(
            "dai_fig3",
            ProfileSpec::new("dai_hyperbola", &[("r", 1.0), ("symmetric", 1.0), ("q", 4.0)], 1.0),
            PeriodicComposition { seed: None, periodic: cosine(4.0), postcompose: None, perturbation: None },
        ),
        case(
            "barcilon_m1k3_cos",
            ProfileSpec::new("semi_ellipse", &[], 1.0),
            Barcilon { m: 1, k: 3, periodic: None, postcompose: None },
        ),
        case(
            "barcilon_m1k3_triangle",
            ProfileSpec::new("semi_ellipse", &[], 1.0),
            Barcilon {
                m: 1,
                k: 3,
                periodic: Some(PeriodicSpec::TriangleWave {
                    period: std::f64::consts::TAU / 3.0,
                    amplitude: 1.0,
                    phase: 0.0,
                }),
                postcompose: None,
            },
        ),
        case(
            "barcilon_m1k4",
            ProfileSpec::new("semi_ellipse", &[], 1.0),
            Barcilon { m: 1, k: 4, periodic: None, postcompose: None },
        ),
        case(
            "barcilon_m2k5_cosine_outer",
            ProfileSpec::new("semi_ellipse", &[], 1.0),
            Barcilon { m: 2, k: 5, periodic: None, postcompose: Some(OuterSpec::Cosine) },
        ),
        case(
            "corner_flow",
            ProfileSpec::new("involution_derived", &[("family", 0.0)], 1.0),
            Involution { s: SymmetricSpec::Sum },
        ),
        case(
            "fractional_linear_product",
            ProfileSpec::new("involution_derived", &[("family", 1.0), ("x0", 0.5), ("b", 1.0)], 1.0),
            Involution { s: SymmetricSpec::Product },
        ),
        case(
            "ellipse_portion_power_sum",
            ProfileSpec::new("involution_derived", &[("family", 2.0), ("b", 1.0)], 1.0),
            Involution { s: SymmetricSpec::PowerSum { p: 4.0 } },
        ),
        case(
            "piecewise_linear_min",
            ProfileSpec::new("involution_derived", &[("family", 3.0), ("x0", 0.0), ("m", 2.0)], 1.0),
            Involution { s: SymmetricSpec::Min },
        ),
        case(
            "lens_numeric",
            ProfileSpec::new("hyperbolic_lens", &[("c", 2.0)], 1.5),
            PeriodicComposition {
                seed: seed_with(0.0, crate::construct::SeedForm::Normalized),
                periodic: cosine(1.0), postcompose: None, perturbation: None },
        ),
        case(
            "custom_bump",
            ProfileSpec {
                kind: "custom".into(),
                params: Default::default(),
                nu: 1.0,
                samples: Some(vec![[0.0, 0.0], [0.5, 0.2], [1.0, 0.3], [1.5, 0.2], [2.0, 0.0]]),
            },
            Abel { seed: seed(0.8) },
        ),
    ];
    SuiteConfig { cases }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abel::{closed_form_abel, extend_seed, SeedFunction};
    use crate::charmap::build_forward_map;
    use crate::geometry::{make_profile, params, Interval};
    use crate::schroder::Provenance;
    use std::sync::Arc;

    #[test]
    fn sweep_placements() {
        let u = SweepSpec::uniform(0.0, 1.0, 4).points().unwrap();
        assert_eq!(u, vec![0.125, 0.375, 0.625, 0.875]);
        let c = SweepSpec::new(-1.0, 1.0, 5, Placement::ChebyshevNodes, 0).points().unwrap();
        assert!(c.windows(2).all(|w| w[1] > w[0]));
        assert!(c.iter().all(|x| x.abs() < 1.0));
        let r1 = SweepSpec::new(0.0, 2.0, 50, Placement::RandomSeeded, 9).points().unwrap();
        let r2 = SweepSpec::new(0.0, 2.0, 50, Placement::RandomSeeded, 9).points().unwrap();
        assert_eq!(r1, r2);
        assert!(SweepSpec::uniform(0.0, 1.0, 1).points().is_err());
        assert!(SweepSpec::uniform(1.0, 0.0, 10).points().is_err());
    }

    #[test]
    fn fet_examples() {
        let lens = closed_form_abel("hyperbolic_lens", &params(&[("c", 2.0)])).unwrap();
        let r = fet_residual_sweep(&|x| Ok(x.atanh()), lens.map(), 0.5f64.atanh(), &SweepSpec::default()).unwrap();
        assert!(r.max_abs < 1e-10);

        let w = closed_form_abel("wedge", &params(&[("tau", 0.5), ("b_plus", 0.0)])).unwrap();
        let r = fet_residual_sweep(&|x| w.eval(x), w.map(), 1.0, &SweepSpec::default()).unwrap();
        assert!(r.max_abs < 1e-10);

        let ell = build_forward_map(&make_profile("semi_ellipse", &params(&[])).unwrap()).unwrap();
        let poly = |x: f64| Ok(2.0 * x.powi(4) - 4.0 * x * x + 1.0);
        let r = fet_residual_sweep(&poly, &ell, 0.0, &SweepSpec::default()).unwrap();
        assert!(r.max_abs < 1e-12);
    }

    #[test]
    fn fed_examples() {
        let a = closed_form_abel("dai_hyperbola", &params(&[("r", 1.0), ("q", 4.0)])).unwrap();
        let prof = make_profile("dai_hyperbola", &params(&[("r", 1.0)])).unwrap();
        let f = WaveProfileFunction::new(Interval::real_line(), a.eval_fn(), Provenance::Custom, 4.0);
        let r = fed_residual_sweep(&f, &prof, 4.0, &SweepSpec::default()).unwrap();
        assert!(r.max_abs < 1e-12);

        let constant = WaveProfileFunction::from_fn(Interval::real_line(), Arc::new(|_| 2.0), Provenance::Custom, 0.0);
        let r = fed_residual_sweep(&constant, &prof, 0.3, &SweepSpec::default()).unwrap();
        assert!((r.max_abs - 0.3).abs() < 1e-15);
    }

    #[test]
    fn continuity_examples() {
        let tri = build_forward_map(&make_profile("isosceles_triangle", &params(&[("tau", 0.35)])).unwrap()).unwrap();
        let a = extend_seed(&tri, SeedFunction::linear(-0.35, 0.35).unwrap()).unwrap();
        let e = continuity_check(&a, 20).unwrap();
        assert!(e.passed, "{e:?}");
        assert!(e.report.as_ref().unwrap().max_abs < 1e-9);
        assert_eq!(e.report.unwrap().samples, 41);

        let lens = build_forward_map(&make_profile("hyperbolic_lens", &params(&[("c", 2.0)])).unwrap()).unwrap();
        let a = extend_seed(&lens, SeedFunction::new(0.0, 0.5, Arc::new(f64::atanh)).unwrap()).unwrap();
        let e = continuity_check(&a, 20).unwrap();
        assert!(e.passed, "{e:?}");

        let closed = closed_form_abel("hyperbolic_lens", &params(&[("c", 2.0)])).unwrap();
        assert!(continuity_check(&closed, 5).is_err());
    }

    #[test]
    fn default_suite_passes() {
        let report = run_suite(&default_suite());
        let failed: Vec<_> = report.entries.iter().filter(|e| !e.passed).collect();
        assert!(failed.is_empty(), "{failed:#?}");
        assert!(report.all_passed);
        assert!(report.entries.windows(2).all(|w| w[0].name <= w[1].name));
    }

    #[test]
    fn empty_suite() {
        let r = run_suite(&SuiteConfig::default());
        assert!(r.entries.is_empty() && r.all_passed);
    }

    #[test]
    fn perturbed_case_fails() {
        let mut cfg = default_suite();
        cfg.cases.retain(|c| c.name == "triangle_fig1");
        if let SolutionSpec::PeriodicComposition { perturbation, .. } = &mut cfg.cases[0].solution {
            *perturbation = Some(1e-3);
        }
        let r = run_suite(&cfg);
        assert!(!r.all_passed);
        assert!(r.entries.iter().any(|e| e.name == "triangle_fig1:fet" && !e.passed));
    }

    #[test]
    fn suite_is_deterministic() {
        let cfg = default_suite();
        let a = serde_json::to_string(&run_suite(&cfg)).unwrap();
        let b = serde_json::to_string(&run_suite(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_roundtrip() {
        let cfg = default_suite();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: SuiteConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }
}
