//! Stream functions `psi(x, z) = f(x - z/nu) - f(x + z/nu)`, grid sampling,
//! boundary and PDE residuals, and sign-change cells.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DepthProfile;
use crate::schroder::WaveProfileFunction;

/// Environment variable capping the sampling thread pool (0 = automatic).
pub const THREADS_ENV: &str = "FUNCWAVE_THREADS";

const MASK_TOL: f64 = 1e-12;
const PDE_NX: usize = 21;
const PDE_NZ: usize = 11;

/// The stream function built from a wave profile function.
#[derive(Debug, Clone)]
pub struct StreamField {
    f: Arc<WaveProfileFunction>,
    nu: f64,
    flux: f64,
}

pub fn extend_field(f: &WaveProfileFunction, nu: f64) -> Result<StreamField> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParams(format!("nu must be positive, got {nu}")));
    }
    Ok(StreamField { f: Arc::new(f.clone()), nu, flux: f.flux() })
}

impl StreamField {
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn flux(&self) -> f64 {
        self.flux
    }

    pub fn profile_function(&self) -> &WaveProfileFunction {
        &self.f
    }

    /// `psi(x, z)`; exactly zero on `z = 0`.
    pub fn psi(&self, x: f64, z: f64) -> Result<f64> {
        if z == 0.0 {
            return Ok(0.0);
        }
        let s = z / self.nu;
        Ok(self.f.eval(x - s)? - self.f.eval(x + s)?)
    }
}

/// Rectangle `[x_lo, x_hi] x [z_lo, z_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_lo: f64,
    pub x_hi: f64,
    pub z_lo: f64,
    pub z_hi: f64,
}

impl Window {
    pub fn new(x_lo: f64, x_hi: f64, z_lo: f64, z_hi: f64) -> Result<Self> {
        let w = Self { x_lo, x_hi, z_lo, z_hi };
        if [x_lo, x_hi, z_lo, z_hi].iter().any(|v| !v.is_finite()) || !(x_lo < x_hi) || !(z_lo < z_hi) {
            return Err(Error::InvalidParams(format!("degenerate window {w:?}")));
        }
        Ok(w)
    }

    /// Window covering the profile's sampling window down to its deepest sampled point.
    pub fn for_profile(profile: &DepthProfile) -> Result<Self> {
        let (lo, hi) = profile.window();
        let deepest = (0..=400)
            .map(|i| profile.d(lo + (hi - lo) * i as f64 / 400.0))
            .filter(|d| d.is_finite())
            .fold(0.0, f64::max);
        Self::new(lo, hi, -deepest.max(1e-3), 0.0)
    }
}

impl FromStr for Window {
    type Err = Error;

    /// Parses `x0,x1,z0,z1`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidParams(format!("window `{s}`: {e}")))?;
        match parts.as_slice() {
            [a, b, c, d] => Self::new(*a, *b, *c, *d),
            _ => Err(Error::InvalidParams(format!("window `{s}` needs four comma-separated numbers"))),
        }
    }
}

/// Uniform lattice of `psi` values, row-major with `x` fastest and row 0 at `z_hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub window: Window,
    pub nx: usize,
    pub nz: usize,
    pub values: Vec<f64>,
    pub inside: Vec<bool>,
}

fn lattice(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

impl FieldGrid {
    pub fn x(&self, i: usize) -> f64 {
        lattice(self.window.x_lo, self.window.x_hi, self.nx, i)
    }

    pub fn z(&self, j: usize) -> f64 {
        lattice(self.window.z_hi, self.window.z_lo, self.nz, j)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i, j)]
    }

    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        self.inside[self.index(i, j)]
    }

    /// `x,z,psi,inside` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 72 + 16);
        out.push_str("x,z,psi,inside\n");
        for j in 0..self.nz {
            let z = self.z(j);
            for i in 0..self.nx {
                let k = self.index(i, j);
                let _ = writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{}",
                    self.x(i),
                    z,
                    self.values[k],
                    u8::from(self.inside[k])
                );
            }
        }
        out
    }
}

fn with_pool<R: Send>(op: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    match cap {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(op),
            Err(_) => op(),
        },
        _ => op(),
    }
}

/// Whether `(x, z)` lies in the closed fluid domain `-d(x) <= z <= 0`.
pub fn in_fluid(profile: &DepthProfile, x: f64, z: f64) -> bool {
    if z > 0.0 || !profile.domain().contains_tol(x, MASK_TOL) {
        return false;
    }
    let d = profile.d(x);
    d.is_finite() && z >= -d - MASK_TOL * (1.0 + d)
}

/// Samples `psi` on an `nx x nz` lattice; nodes outside the fluid store 0.
pub fn sample_grid(
    field: &StreamField,
    profile: &DepthProfile,
    window: Window,
    nx: usize,
    nz: usize,
) -> Result<FieldGrid> {
    if nx < 2 || nz < 2 {
        return Err(Error::InvalidParams(format!("grid needs nx, nz >= 2, got {nx} x {nz}")));
    }
    let mut grid = FieldGrid { window, nx, nz, values: Vec::new(), inside: Vec::new() };
    let nodes: Vec<(f64, f64)> = (0..nz)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| (grid.x(i), grid.z(j)))
        .collect();
    let sampled: Vec<Result<(f64, bool)>> = with_pool(|| {
        nodes
            .par_iter()
            .map(|&(x, z)| {
                if in_fluid(profile, x, z) {
                    field.psi(x, z).map(|v| (v, true))
                } else {
                    Ok((0.0, false))
                }
            })
            .collect()
    });
    let mut values = Vec::with_capacity(nodes.len());
    let mut inside = Vec::with_capacity(nodes.len());
    for r in sampled {
        let (v, m) = r?;
        values.push(v);
        inside.push(m);
    }
    grid.values = values;
    grid.inside = inside;
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

/// Summary statistics of absolute residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub samples: usize,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub argmax: Location,
}

impl ResidualReport {
    /// Non-finite residuals count as infinite.
    pub fn from_residuals(items: impl IntoIterator<Item = (Location, f64)>) -> Self {
        let mut samples = 0;
        let mut max_abs = 0.0f64;
        let mut sum = 0.0;
        let mut argmax = Location { x: f64::NAN, z: None };
        for (loc, r) in items {
            let r = if r.is_finite() { r.abs() } else { f64::INFINITY };
            if samples == 0 || r > max_abs {
                max_abs = r;
                argmax = loc;
            }
            sum += r;
            samples += 1;
        }
        let mean_abs = if samples == 0 { 0.0 } else { (sum / samples as f64).min(max_abs) };
        Self { samples, max_abs, mean_abs, argmax }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs < tol
    }
}

/// `|psi(x, -d(x)) - Q|` at `n` midpoints of the profile window.
pub fn boundary_residual(field: &StreamField, profile: &DepthProfile, n: usize) -> Result<ResidualReport> {
    if n < 2 {
        return Err(Error::InvalidParams("boundary residual needs n >= 2".into()));
    }
    let (lo, hi) = profile.window();
    let items = (0..n)
        .map(|i| {
            let x = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            let z = -profile.d(x);
            let r = field.psi(x, z)? - field.flux();
            Ok((Location { x, z: Some(z) }, r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::from_residuals(items))
}

/// Max of `|psi_xx - nu^2 psi_zz|` by central differences over a 21 x 11
/// lattice of `window`. The `x` step is `h`, the `z` step is `nu h/2`.
pub fn pde_residual(field: &StreamField, window: Window, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParams(format!("step must be positive, got {h}")));
    }
    let nu = field.nu();
    let k = nu * h / 2.0;
    let mut worst = 0.0f64;
    for j in 0..PDE_NZ {
        let z = lattice(window.z_lo, window.z_hi, PDE_NZ, j);
        for i in 0..PDE_NX {
            let x = lattice(window.x_lo, window.x_hi, PDE_NX, i);
            let c = field.psi(x, z)?;
            let xx = (field.psi(x + h, z)? - 2.0 * c + field.psi(x - h, z)?) / (h * h);
            let zz = (field.psi(x, z + k)? - 2.0 * c + field.psi(x, z - k)?) / (k * k);
            let r = (xx - nu * nu * zz).abs();
            worst = worst.max(if r.is_finite() { r } else { f64::INFINITY });
        }
    }
    Ok(worst)
}

/// Cells `(i, j)` (corners `i..=i+1`, `j..=j+1`) with all corners inside and
/// both a strictly positive and a strictly negative corner value.
pub fn nodal_cells(grid: &FieldGrid) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for j in 0..grid.nz.saturating_sub(1) {
        for i in 0..grid.nx.saturating_sub(1) {
            let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
            if !corners.iter().all(|&(a, b)| grid.is_inside(a, b)) {
                continue;
            }
            let vals = corners.map(|(a, b)| grid.value(a, b));
            if vals.iter().any(|&v| v > 0.0) && vals.iter().any(|&v| v < 0.0) {
                cells.push((i, j));
            }
        }
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
    Neither,
}

/// Parity of `f` on `[-r, r]` from 200 symmetric pairs, with tolerance `tol`.
pub fn detect_parity(f: &WaveProfileFunction, r: f64, tol: f64) -> Parity {
    let pairs: Vec<(f64, f64)> = (0..200)
        .filter_map(|i| {
            let x = r * (i as f64 + 0.5) / 200.0;
            Some((f.eval(x).ok()?, f.eval(-x).ok()?))
        })
        .collect();
    if pairs.is_empty() {
        return Parity::Neither;
    }
    if pairs.iter().all(|(a, b)| (a - b).abs() <= tol) {
        Parity::Even
    } else if pairs.iter().all(|(a, b)| (a + b).abs() <= tol) {
        Parity::Odd
    } else {
        Parity::Neither
    }
}

/// Symmetry residuals of `psi` on an `n x n` lattice of fluid points:
/// `|psi(x, -z) + psi(x, z)|` always, plus `|psi(-x, z) + psi(x, z)|` for even
/// `f` and `|psi(-x, z) - psi(x, z)|` for odd `f` where `-x` is in the fluid too.
pub fn parity_check(
    field: &StreamField,
    profile: &DepthProfile,
    parity: Parity,
    n: usize,
) -> Result<ResidualReport> {
    let (lo, hi) = profile.window();
    let mut items = Vec::new();
    for i in 0..n {
        let x = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
        let depth = profile.d(x);
        if !depth.is_finite() {
            continue;
        }
        for j in 0..n {
            let z = -depth * (j as f64 + 0.5) / n as f64;
            let v = field.psi(x, z)?;
            let loc = Location { x, z: Some(z) };
            items.push((loc, field.psi(x, -z)? + v));
            let mirrored = in_fluid(profile, -x, z);
            match parity {
                Parity::Even if mirrored => items.push((loc, field.psi(-x, z)? + v)),
                Parity::Odd if mirrored => items.push((loc, field.psi(-x, z)? - v)),
                _ => {}
            }
        }
    }
    Ok(ResidualReport::from_residuals(items))
}
