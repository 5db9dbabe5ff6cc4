//! Unit-circle sweep of the scheduled eigenvalues over a sampling-time range.
//!
//! For each grid point the sweep records the discrete targets `exp(μ ts)` of
//! the three EMC groups and the two motor poles, and cross-checks the gains
//! produced by [`schedule_gains`]: the closed-loop matrices are assembled and
//! their spectrum is compared against the targets, both as eigenvalues and as
//! characteristic-polynomial coefficients.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::emc::{
    build_matrices, controller_closed_loop, observer_closed_loop, reference_closed_loop,
    schedule_gains, ContinuousEigenSpec, EmcOptions,
};
use crate::numerics::{eigenvalues, poly_from_roots, Mat};
use crate::plant::{tf_coefficients, PlantParams};
use crate::{Error, Result};

/// Eigenvalue group as labelled in the CSV output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenGroup {
    /// Reference dynamics.
    R,
    /// Tracking loop.
    K,
    /// Noise estimator.
    N,
    /// Motor transfer-function poles.
    Plant,
}

impl fmt::Display for EigenGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EigenGroup::R => "R",
            EigenGroup::K => "K",
            EigenGroup::N => "N",
            EigenGroup::Plant => "plant",
        })
    }
}

/// One eigenvalue of one group at one grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenPoint {
    /// Sampling interval.
    pub ts: f64,
    /// Group.
    pub group: EigenGroup,
    /// Index inside the group.
    pub index: usize,
    /// Value.
    pub value: Complex64,
}

impl EigenPoint {
    /// `|λ|`.
    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }

    /// `arg λ` in radians.
    pub fn argument(&self) -> f64 {
        self.value.arg()
    }
}

/// Sweep result.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    /// Sampling intervals of the grid.
    pub ts_grid: Vec<f64>,
    /// λ_R per grid point.
    pub lambda_r: Vec<Complex64>,
    /// λ_K per grid point.
    pub lambda_k: Vec<[Complex64; 2]>,
    /// λ_N per grid point.
    pub lambda_n: Vec<[Complex64; 3]>,
    /// Motor poles per grid point.
    pub plant_poles: Vec<[Complex64; 2]>,
    /// True when every listed modulus is below one.
    pub all_stable: bool,
    /// Largest listed modulus.
    pub max_modulus: f64,
    /// Largest distance between an assembled closed-loop eigenvalue and its
    /// target over the grid.
    pub max_eigen_deviation: f64,
    /// Largest characteristic-polynomial coefficient mismatch over the grid.
    pub max_charpoly_deviation: f64,
}

impl StabilityReport {
    /// Flattens the report into rows, grid-major, groups in R, K, N, plant order.
    pub fn points(&self) -> Vec<EigenPoint> {
        let mut out = Vec::with_capacity(self.ts_grid.len() * 8);
        for (i, &ts) in self.ts_grid.iter().enumerate() {
            let mut push = |group, values: &[Complex64]| {
                for (index, value) in values.iter().enumerate() {
                    out.push(EigenPoint {
                        ts,
                        group,
                        index,
                        value: *value,
                    });
                }
            };
            push(EigenGroup::R, &[self.lambda_r[i]]);
            push(EigenGroup::K, &self.lambda_k[i]);
            push(EigenGroup::N, &self.lambda_n[i]);
            push(EigenGroup::Plant, &self.plant_poles[i]);
        }
        out
    }

    /// Largest |λ_N| over the grid.
    pub fn max_lambda_n_modulus(&self) -> f64 {
        self.lambda_n
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Greedy nearest matching of computed eigenvalues to targets; returns the
/// largest distance.
pub fn spectrum_deviation(computed: &[Complex64], targets: &[f64]) -> f64 {
    let mut used = alloc::vec![false; targets.len()];
    let mut worst = 0.0f64;
    for z in computed {
        let (j, d) = targets
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, t)| (j, (z - t).norm()))
            .fold((usize::MAX, f64::INFINITY), |best, c| {
                if c.1 < best.1 {
                    c
                } else {
                    best
                }
            });
        if j != usize::MAX {
            used[j] = true;
        }
        worst = worst.max(d);
    }
    worst
}

fn charpoly_deviation(m: &Mat, targets: &[f64]) -> Result<f64> {
    let roots: Vec<_> = targets.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    let want = poly_from_roots(&roots)?;
    let got = m.characteristic_polynomial()?;
    Ok(got
        .coeffs()
        .iter()
        .zip(want.coeffs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Sweeps `n_points` uniformly spaced intervals in `[ts_min, ts_max]`.
pub fn sweep(
    spec: &ContinuousEigenSpec,
    p: &PlantParams,
    options: &EmcOptions,
    ts_min: f64,
    ts_max: f64,
    n_points: usize,
) -> Result<StabilityReport> {
    if !(ts_min > 0.0) || !(ts_max > ts_min) {
        return Err(Error::InvalidParameter {
            field: "ts_range",
            reason: "need 0 < ts_min < ts_max",
        });
    }
    if n_points < 2 {
        return Err(Error::InvalidParameter {
            field: "n_points",
            reason: "need at least 2 grid points",
        });
    }
    let mut report = StabilityReport {
        ts_grid: Vec::with_capacity(n_points),
        lambda_r: Vec::with_capacity(n_points),
        lambda_k: Vec::with_capacity(n_points),
        lambda_n: Vec::with_capacity(n_points),
        plant_poles: Vec::with_capacity(n_points),
        all_stable: true,
        max_modulus: 0.0,
        max_eigen_deviation: 0.0,
        max_charpoly_deviation: 0.0,
    };
    let step = (ts_max - ts_min) / (n_points - 1) as f64;
    for i in 0..n_points {
        let ts = if i + 1 == n_points {
            ts_max
        } else {
            ts_min + step * i as f64
        };
        let targets = spec.discrete(ts);
        let m = build_matrices(p, ts, options.disturbance_pole)?;
        let g = schedule_gains(spec, &m)?;

        let ref_dev = (reference_closed_loop(&m, &g) - targets.lambda_r).abs();
        let k_mat = controller_closed_loop(&m, &g, options.controller_matrix);
        let n_mat = observer_closed_loop(&m, &g);
        let eig_dev = ref_dev
            .max(spectrum_deviation(&eigenvalues(&k_mat)?, &targets.lambda_k))
            .max(spectrum_deviation(&eigenvalues(&n_mat)?, &targets.lambda_n));
        let poly_dev = ref_dev
            .max(charpoly_deviation(&k_mat, &targets.lambda_k)?)
            .max(charpoly_deviation(&n_mat, &targets.lambda_n)?);
        report.max_eigen_deviation = report.max_eigen_deviation.max(eig_dev);
        report.max_charpoly_deviation = report.max_charpoly_deviation.max(poly_dev);

        let real = |v: f64| Complex64::new(v, 0.0);
        report.ts_grid.push(ts);
        report.lambda_r.push(real(targets.lambda_r));
        report.lambda_k.push(targets.lambda_k.map(real));
        report.lambda_n.push(targets.lambda_n.map(real));
        report.plant_poles.push(tf_coefficients(p, ts).poles());
    }
    let moduli = report.points().into_iter().map(|pt| pt.modulus());
    report.max_modulus = moduli.clone().fold(0.0, f64::max);
    report.all_stable = report.max_modulus < 1.0;
    Ok(report)
}
