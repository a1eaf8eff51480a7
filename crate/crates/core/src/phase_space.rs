//! Reduced single-mode states and their Wigner functions.
//!
//! Convention: ∫ W d²α = 1 with d²α = d(Re α) d(Im α); the vacuum has
//! W(α) = (2/π) exp(−2|α|²).

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::ModeIndex;
use crate::params::SystemParams;
use crate::state::{DensityMatrix, HERMITIAN_TOL, TRACE_TOL};

/// Largest imaginary residue tolerated in a Wigner value.
pub const IMAG_TOL: f64 = 1e-10;

/// Density matrix of one mode, indexed by Fock number.
#[derive(Debug, Clone)]
pub struct SingleModeState {
    mat: Mat<C64>,
}

impl SingleModeState {
    /// Checks Hermiticity and unit trace.
    pub fn new(mat: Mat<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), got: mat.ncols() });
        }
        let d = mat.nrows();
        for j in 0..d {
            for i in 0..=j {
                if (mat[(i, j)] - mat[(j, i)].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidState("single-mode state is not Hermitian".into()));
                }
            }
        }
        let tr: C64 = (0..d).map(|i| mat[(i, i)]).sum();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("single-mode trace is {tr}")));
        }
        Ok(Self { mat })
    }

    pub fn fock(n_max: usize, n: usize) -> Self {
        let mut mat = Mat::<C64>::zeros(n_max + 1, n_max + 1);
        mat[(n, n)] = C64::new(1.0, 0.0);
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.mat[(m, n)]
    }

    pub fn as_mat(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn mean_number(&self) -> f64 {
        (0..self.dim()).map(|n| n as f64 * self.mat[(n, n)].re).sum()
    }
}

/// Traces out the mode other than `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: ModeIndex) -> SingleModeState {
    let t = rho.trunc();
    let (d1, d2) = (t.dim_of(ModeIndex::One), t.dim_of(ModeIndex::Two));
    let mat = match keep {
        ModeIndex::One => Mat::from_fn(d1, d1, |a, b| (0..d2).map(|k| rho.get(a * d2 + k, b * d2 + k)).sum()),
        ModeIndex::Two => Mat::from_fn(d2, d2, |a, b| (0..d1).map(|k| rho.get(k * d2 + a, k * d2 + b)).sum()),
    };
    SingleModeState { mat }
}

/// Phase-space window and sampled values, `values[j * n_re + i]` at
/// α = re(i) + i·im(j).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub const MIN_POINTS: usize = 8;
    pub const DEFAULT_POINTS: usize = 101;
    pub const DEFAULT_HALF_WIDTH: f64 = 3.5;

    /// Empty (all-zero) grid over the given window.
    pub fn new(re: (f64, f64), im: (f64, f64), n_re: usize, n_im: usize) -> Result<Self> {
        if !(re.0 < re.1 && im.0 < im.1) || ![re.0, re.1, im.0, im.1].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParams("Wigner window bounds must be finite and ordered".into()));
        }
        if n_re < Self::MIN_POINTS || n_im < Self::MIN_POINTS {
            return Err(Error::InvalidParams(format!(
                "Wigner grid needs at least {} points per axis",
                Self::MIN_POINTS
            )));
        }
        Ok(Self {
            re_min: re.0,
            re_max: re.1,
            im_min: im.0,
            im_max: im.1,
            n_re,
            n_im,
            values: vec![0.0; n_re * n_im],
        })
    }

    /// Square window [−h, h]² with `n` points per axis.
    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new((-half_width, half_width), (-half_width, half_width), n, n)
    }

    /// 101×101 over [−3.5, 3.5]², scaled by √(G/κ) when κ > 0.
    pub fn default_for(params: &SystemParams) -> Self {
        let scale = if params.kappa > 0.0 { (params.gain / params.kappa).sqrt() } else { 1.0 };
        Self::square(Self::DEFAULT_HALF_WIDTH * scale, Self::DEFAULT_POINTS).expect("default window is valid")
    }

    pub fn re(&self, i: usize) -> f64 {
        self.re_min + (self.re_max - self.re_min) * i as f64 / (self.n_re - 1) as f64
    }

    pub fn im(&self, j: usize) -> f64 {
        self.im_min + (self.im_max - self.im_min) * j as f64 / (self.n_im - 1) as f64
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n_re + i]
    }

    fn cell_area(&self) -> f64 {
        (self.re_max - self.re_min) / (self.n_re - 1) as f64 * (self.im_max - self.im_min) / (self.n_im - 1) as f64
    }

    /// Trapezoidal ∫ f(α) W(α) d²α.
    pub fn integrate_with(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for j in 0..self.n_im {
            let wj = if j == 0 || j == self.n_im - 1 { 0.5 } else { 1.0 };
            for i in 0..self.n_re {
                let wi = if i == 0 || i == self.n_re - 1 { 0.5 } else { 1.0 };
                total += wi * wj * f(self.re(i), self.im(j)) * self.value(i, j);
            }
        }
        total * self.cell_area()
    }

    pub fn integral(&self) -> f64 {
        self.integrate_with(|_, _| 1.0)
    }

    /// ∫|α|² W d²α − ½, the symmetric-ordering estimate of ⟨a†a⟩.
    pub fn mean_number(&self) -> f64 {
        self.integrate_with(|x, y| x * x + y * y) - 0.5
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// |α| at the grid maximum.
    pub fn peak_radius(&self) -> f64 {
        let (k, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        let (i, j) = (k % self.n_re, k / self.n_re);
        self.re(i).hypot(self.im(j))
    }

    /// max |W(α) − W(iα)| over the grid, for a square grid symmetric about 0.
    pub fn quarter_turn_asymmetry(&self) -> Result<f64> {
        let symmetric = self.n_re == self.n_im
            && (self.re_min + self.re_max).abs() < 1e-12
            && (self.re_min - self.im_min).abs() < 1e-12
            && (self.re_max - self.im_max).abs() < 1e-12;
        if !symmetric {
            return Err(Error::InvalidParams("quarter-turn check needs a square grid centred at 0".into()));
        }
        let n = self.n_re;
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                // iα maps (x, y) to (−y, x)
                let (ri, rj) = (n - 1 - j, i);
                worst = worst.max((self.value(i, j) - self.value(ri, rj)).abs());
            }
        }
        Ok(worst)
    }
}

/// Evaluates the Wigner function of `rho` on the window of `grid`.
pub fn wigner(rho: &SingleModeState, grid: &WignerGrid) -> Result<WignerGrid> {
    let d = rho.dim();
    let mut out = grid.clone();
    let mut g = vec![0.0; d];
    let inv_sqrt_fact: Vec<f64> = {
        let mut v = vec![1.0; d];
        for k in 1..d {
            v[k] = v[k - 1] / (k as f64).sqrt();
        }
        v
    };
    for j in 0..grid.n_im {
        for i in 0..grid.n_re {
            let alpha = C64::new(grid.re(i), grid.im(j));
            let x = 4.0 * alpha.norm_sqr();
            let mut total = C64::new(0.0, 0.0);
            let mut pow_conj = C64::new(1.0, 0.0); // (2α*)^k
            let mut pow = C64::new(1.0, 0.0); // (2α)^k
            for k in 0..d {
                // g_n = √(n!/(n+k)!) L_n^{(k)}(x), by the scaled three-term recurrence
                let len = d - k;
                g[0] = inv_sqrt_fact[k];
                if len > 1 {
                    g[1] = (1.0 + k as f64 - x) * g[0] / ((1 + k) as f64).sqrt();
                }
                for n in 1..len.saturating_sub(1) {
                    let nf = n as f64;
                    let kf = k as f64;
                    g[n + 1] = ((2.0 * nf + 1.0 + kf - x) * g[n] - (nf * (nf + kf)).sqrt() * g[n - 1])
                        / ((nf + 1.0) * (nf + 1.0 + kf)).sqrt();
                }
                let mut lower = C64::new(0.0, 0.0);
                let mut upper = C64::new(0.0, 0.0);
                for n in 0..len {
                    let s = if n % 2 == 0 { g[n] } else { -g[n] };
                    lower += rho.get(n + k, n) * s;
                    if k > 0 {
                        upper += rho.get(n, n + k) * s;
                    }
                }
                total += pow_conj * lower + pow * upper;
                pow_conj *= 2.0 * alpha.conj();
                pow *= 2.0 * alpha;
            }
            let w = total * (2.0 / PI) * (-0.5 * x).exp();
            if w.im.abs() > IMAG_TOL {
                return Err(Error::InvalidState(format!("Wigner value has imaginary part {:e}", w.im)));
            }
            if !w.re.is_finite() {
                return Err(Error::InvalidState("non-finite Wigner value".into()));
            }
            out.values[j * grid.n_re + i] = w.re;
        }
    }
    Ok(out)
}
