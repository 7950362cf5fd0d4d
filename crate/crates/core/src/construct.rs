//! JSON-described constructions: a profile plus a recipe for `f`.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::abel::{closed_form_abel, extend_seed, AbelSolution, SeedFunction};
use crate::charmap::{build_forward_map, ForwardMap};
use crate::error::{Error, Result};
use crate::geometry::{DepthProfile, InvolutionFamily, ProfileKind, ProfileSpec, RealFn};
use crate::schroder::{
    barcilon_solution, compose_periodic, involution_solution, postcompose, triangle_wave, Involution,
    PeriodicFunction, PeriodicSpec, Provenance, SymmetricFn, WaveProfileFunction,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedForm {
    #[default]
    Linear,
    /// Affine onto `[0, 1)`, so `Q = 1`.
    Normalized,
    ClosedForm,
    Tabulated,
}

/// Seed on `[x0, T(x0))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSpec {
    #[serde(default)]
    pub x0: Option<f64>,
    #[serde(default)]
    pub form: SeedForm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

/// Outer function for post-composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterSpec {
    Square,
    Cosine,
    TriangleWave,
}

impl OuterSpec {
    pub fn function(self) -> RealFn {
        match self {
            OuterSpec::Square => Arc::new(|y| y * y),
            OuterSpec::Cosine => Arc::new(f64::cos),
            OuterSpec::TriangleWave => Arc::new(triangle_wave),
        }
    }
}

/// Cyclically invariant combination of an involution orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymmetricSpec {
    Sum,
    Min,
    Product,
    PowerSum { p: f64 },
}

impl SymmetricSpec {
    pub fn function(self) -> SymmetricFn {
        match self {
            SymmetricSpec::Sum => Arc::new(|v: &[f64]| v.iter().sum()),
            SymmetricSpec::Min => Arc::new(|v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min)),
            SymmetricSpec::Product => Arc::new(|v: &[f64]| v.iter().product()),
            SymmetricSpec::PowerSum { p } => Arc::new(move |v: &[f64]| v.iter().map(|u| u.powf(p)).sum()),
        }
    }
}

/// Recipe for `f`, tagged by `type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SolutionSpec {
    /// The Abel function itself; the wave function carries flux `Q`.
    Abel {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<SeedSpec>,
    },
    /// `P ∘ a`, optionally post-composed and perturbed by `epsilon x`.
    PeriodicComposition {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<SeedSpec>,
        periodic: PeriodicSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        postcompose: Option<OuterSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        perturbation: Option<f64>,
    },
    /// Semi-ellipse mode; the profile's `nu` is replaced by `cot(m pi/k)`.
    Barcilon {
        m: i64,
        k: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        periodic: Option<PeriodicSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        postcompose: Option<OuterSpec>,
    },
    /// Symmetric function of the orbit of the profile's involution.
    Involution { s: SymmetricSpec },
}

/// A built construction.
#[derive(Debug, Clone)]
pub struct Construction {
    pub profile: DepthProfile,
    pub map: ForwardMap,
    pub abel: Option<AbelSolution>,
    pub f: WaveProfileFunction,
}

impl Construction {
    pub fn nu(&self) -> f64 {
        self.profile.nu()
    }
}

fn abel_from(profile: &DepthProfile, map: &ForwardMap, seed: Option<&SeedSpec>) -> Result<AbelSolution> {
    let Some(seed) = seed else {
        return closed_form_abel(profile.kind().as_str(), profile.params());
    };
    let built = match seed.form {
        SeedForm::Tabulated => {
            let samples = seed
                .samples
                .as_ref()
                .ok_or_else(|| Error::Config("tabulated seed needs samples".into()))?;
            let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s[0], s[1])).collect();
            SeedFunction::tabulated(&pts)?
        }
        SeedForm::Linear | SeedForm::Normalized | SeedForm::ClosedForm => {
            let x0 = seed.x0.ok_or_else(|| Error::Config("seed needs x0".into()))?;
            let x1 = map.apply(x0)?;
            if seed.form == SeedForm::Linear {
                SeedFunction::linear(x0, x1)?
            } else if seed.form == SeedForm::Normalized {
                SeedFunction::new(x0, x1, Arc::new(move |x| (x - x0) / (x1 - x0)))?
            } else {
                let a = closed_form_abel(profile.kind().as_str(), profile.params())?;
                let ae = a.eval_fn();
                SeedFunction::new(x0, x1, Arc::new(move |x| ae(x).unwrap_or(f64::NAN)))?.with_q(a.q())
            }
        }
    };
    let built = match seed.q {
        Some(q) => built.with_q(q),
        None => built,
    };
    extend_seed(map, built)
}

fn involution_for(profile: &DepthProfile) -> Result<Involution> {
    let family = profile
        .involution_family()
        .ok_or_else(|| Error::Config("involution solutions need an involution_derived profile".into()))?;
    match family {
        InvolutionFamily::Reciprocal => Ok(Involution::reciprocal()),
        InvolutionFamily::FractionalLinear { x0, b } => Involution::fractional_linear(x0, b),
        InvolutionFamily::EllipsePortion { b } => Involution::ellipse_portion(b),
        InvolutionFamily::PiecewiseLinear { x0, m } => Involution::piecewise_linear(x0, m),
    }
}

fn perturb(f: &WaveProfileFunction, eps: f64) -> WaveProfileFunction {
    let g = f.clone();
    WaveProfileFunction::new(
        f.domain(),
        Arc::new(move |x| Ok(g.eval(x)? + eps * x)),
        Provenance::Custom,
        f.flux(),
    )
}

/// Builds the profile, its forward map and the wave function.
pub fn build(profile: &ProfileSpec, solution: &SolutionSpec) -> Result<Construction> {
    let mut profile = profile.build()?;
    match solution {
        SolutionSpec::Abel { seed } => {
            let map = build_forward_map(&profile)?;
            let a = abel_from(&profile, &map, seed.as_ref())?;
            let f = WaveProfileFunction::new(a.domain(), a.eval_fn(), Provenance::Custom, a.q());
            Ok(Construction { profile, map, abel: Some(a), f })
        }
        SolutionSpec::PeriodicComposition { seed, periodic, postcompose: outer, perturbation } => {
            let map = build_forward_map(&profile)?;
            let a = abel_from(&profile, &map, seed.as_ref())?;
            let mut f = compose_periodic(&a, &periodic.build()?)?;
            if let Some(outer) = outer {
                f = postcompose(&f, outer.function());
            }
            if let Some(eps) = perturbation {
                f = perturb(&f, *eps);
            }
            Ok(Construction { profile, map, abel: Some(a), f })
        }
        SolutionSpec::Barcilon { m, k, periodic, postcompose: outer } => {
            if profile.kind() != ProfileKind::SemiEllipse {
                return Err(Error::Config("Barcilon solutions need a semi_ellipse profile".into()));
            }
            let p = match periodic {
                Some(spec) => spec.build()?,
                None if *k > 0 => PeriodicFunction::cosine(TAU / *k as f64)?,
                None => return Err(Error::InvalidModeNumbers { m: *m, k: *k }),
            };
            let (nu, mut f) = barcilon_solution(*m, *k, &p)?;
            profile = profile.with_nu(nu * profile.scale())?;
            if let Some(outer) = outer {
                f = postcompose(&f, outer.function());
            }
            let map = build_forward_map(&profile)?;
            Ok(Construction { profile, map, abel: None, f })
        }
        SolutionSpec::Involution { s } => {
            let map = build_forward_map(&profile)?;
            let f = involution_solution(&involution_for(&profile)?, s.function())?;
            Ok(Construction { profile, map, abel: None, f })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fet(c: &Construction, n: usize) -> f64 {
        let (lo, hi) = c.map.window();
        (0..n)
            .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
            .map(|x| (c.f.eval(c.map.eval(x)).unwrap() - c.f.eval(x).unwrap() - c.f.flux()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn parses_and_builds_fig1() {
        let json = r#"{
            "profile": {"kind": "isosceles_triangle", "params": {"tau": 0.35}, "nu": 1.0},
            "solution": {"type": "periodic_composition", "seed": {"x0": -0.35, "form": "linear"},
                         "periodic": {"kind": "cosine", "period": 0.7}}
        }"#;
        #[derive(Deserialize)]
        struct Doc {
            profile: ProfileSpec,
            solution: SolutionSpec,
        }
        let doc: Doc = serde_json::from_str(json).unwrap();
        let c = build(&doc.profile, &doc.solution).unwrap();
        assert!(fet(&c, 500) < 1e-9);
        assert!((c.f.eval(0.1).unwrap() - (PI * 0.1 / 0.35).cos()).abs() < 1e-12);
    }

    #[test]
    fn barcilon_overrides_nu() {
        let spec = ProfileSpec::new("semi_ellipse", &[], 1.0);
        let c = build(&spec, &SolutionSpec::Barcilon { m: 1, k: 3, periodic: None, postcompose: None }).unwrap();
        assert!((c.nu() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(fet(&c, 500) < 1e-9);
        let bad = ProfileSpec::new("hyperbolic_lens", &[("c", 2.0)], 1.0);
        assert!(matches!(
            build(&bad, &SolutionSpec::Barcilon { m: 1, k: 3, periodic: None, postcompose: None }),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn seeds_and_outer_functions() {
        let spec = ProfileSpec::new("hyperbolic_lens", &[("c", 2.0)], 1.0);
        let q = 0.5f64.atanh();
        for seed in [
            None,
            Some(SeedSpec { x0: Some(0.0), form: SeedForm::ClosedForm, samples: None, q: None }),
            Some(SeedSpec { x0: Some(-0.2), form: SeedForm::Linear, samples: None, q: None }),
        ] {
            for outer in [None, Some(OuterSpec::Square), Some(OuterSpec::Cosine), Some(OuterSpec::TriangleWave)] {
                let period = if seed.as_ref().is_some_and(|s| s.form == SeedForm::Linear) {
                    // linear seed on [-0.2, T(-0.2)) has jump T(-0.2) + 0.2
                    (1.0 - 0.4) / (2.0 - 0.2) + 0.2
                } else {
                    q
                };
                let sol = SolutionSpec::PeriodicComposition {
                    seed: seed.clone(),
                    periodic: PeriodicSpec::Sine { period, amplitude: 1.0, phase: 0.0 },
                    postcompose: outer,
                    perturbation: None,
                };
                let c = build(&spec, &sol).unwrap();
                assert!(fet(&c, 300) < 1e-9, "{seed:?} {outer:?}");
            }
        }
        let tab = SeedSpec {
            x0: None,
            form: SeedForm::Tabulated,
            samples: Some((0..=10).map(|i| [0.05 * i as f64, (0.05 * i as f64).atanh()]).collect()),
            q: None,
        };
        let c = build(&spec, &SolutionSpec::Abel { seed: Some(tab) }).unwrap();
        assert!(fet(&c, 300) < 1e-9);
    }

    #[test]
    fn perturbation_breaks_periodicity() {
        let spec = ProfileSpec::new("isosceles_triangle", &[("tau", 0.35)], 1.0);
        let sol = SolutionSpec::PeriodicComposition {
            seed: Some(SeedSpec { x0: Some(-0.35), form: SeedForm::Linear, samples: None, q: None }),
            periodic: PeriodicSpec::Cosine { period: 0.7, amplitude: 1.0, phase: 0.0 },
            postcompose: None,
            perturbation: Some(1e-3),
        };
        let c = build(&spec, &sol).unwrap();
        assert!(fet(&c, 500) > 1e-5);
    }

    #[test]
    fn involution_construction() {
        let spec = ProfileSpec::new("involution_derived", &[("family", 0.0)], 1.0);
        let c = build(&spec, &SolutionSpec::Involution { s: SymmetricSpec::Sum }).unwrap();
        assert!(fet(&c, 200) < 1e-10);
        let spec = ProfileSpec::new("involution_derived", &[("family", 3.0), ("m", 3.0)], 1.0);
        let c = build(&spec, &SolutionSpec::Involution { s: SymmetricSpec::Min }).unwrap();
        assert!(fet(&c, 200) < 1e-10);
        let spec = ProfileSpec::new("wedge", &[("tau", 0.5)], 1.0);
        assert!(build(&spec, &SolutionSpec::Involution { s: SymmetricSpec::Sum }).is_err());
    }
}
