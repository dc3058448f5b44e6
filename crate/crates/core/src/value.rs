//! Evaluation of the value ladder `v(t) = exp(−M(T−t))·w`.
//!
//! Values grow like `e^{−λ⁰(T−t)}` and overflow `f64` for long horizons, so
//! the ladder is evaluated in log space: `ln v_q = −λ⁰τ + ln s_q(τ)` with
//! `s_q(τ) = Σᵢ e^{−(λⁱ−λ⁰)τ} cⁱ gⁱ_q` bounded for every `τ ≥ 0`.

use crate::error::Result;
use crate::ladder::LadderMatrix;
use crate::params::ModelParams;
use crate::spectral::{decompose, SpectralDecomposition};

#[derive(Debug, Clone)]
pub struct ValueLadder {
    matrix: LadderMatrix,
    decomposition: SpectralDecomposition,
    coefficients: Vec<f64>,
}

impl ValueLadder {
    pub fn new(matrix: LadderMatrix) -> Result<Self> {
        let decomposition = decompose(&matrix)?;
        Ok(Self::from_parts(matrix, decomposition))
    }

    pub fn from_parts(matrix: LadderMatrix, decomposition: SpectralDecomposition) -> Self {
        let coefficients = decomposition
            .eigenvectors()
            .iter()
            .map(|g| g.iter().zip(matrix.terminal()).map(|(a, b)| a * b).sum())
            .collect();
        ValueLadder {
            matrix,
            decomposition,
            coefficients,
        }
    }

    pub fn matrix(&self) -> &LadderMatrix {
        &self.matrix
    }
    pub fn params(&self) -> &ModelParams {
        self.matrix.params()
    }
    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }
    /// Projections `cⁱ = ⟨gⁱ, w⟩` of the terminal vector on the eigenbasis.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `ln v_q(t)` for every inventory, indexed by `q + Q`.
    pub fn log_values(&self, t: f64) -> Result<Vec<f64>> {
        self.params().check_time(t)?;
        Ok(self.log_values_at_time_to_go(self.params().horizon() - t))
    }

    /// `ln v_q` as a function of the time to go `τ = T − t ≥ 0`.
    pub fn log_values_at_time_to_go(&self, tau: f64) -> Vec<f64> {
        debug_assert!(tau >= 0.0);
        if tau == 0.0 {
            return self.matrix.terminal().iter().map(|w| w.ln()).collect();
        }
        let lambda0 = self.decomposition.ground_value();
        let n = self.matrix.dim();
        let mut scaled = vec![0.0; n];
        for ((lambda, g), c) in self
            .decomposition
            .eigenvalues()
            .iter()
            .zip(self.decomposition.eigenvectors())
            .zip(&self.coefficients)
        {
            let weight = (-(lambda - lambda0) * tau).exp() * c;
            if weight == 0.0 {
                continue;
            }
            for (s, gi) in scaled.iter_mut().zip(g) {
                *s += weight * gi;
            }
        }
        let log_scale = -lambda0 * tau;
        scaled.iter().map(|s| log_scale + s.ln()).collect()
    }

    pub fn log_value(&self, t: f64, q: i32) -> Result<f64> {
        self.params().check_inventory(q)?;
        Ok(self.log_values(t)?[self.params().index_of(q)])
    }

    /// `v_q(t)` itself. Overflows to infinity when `−λ⁰(T−t)` exceeds ~709.
    pub fn value(&self, t: f64, q: i32) -> Result<f64> {
        Ok(self.log_value(t, q)?.exp())
    }

    /// `ln(v_q(t) / (e^{−λ⁰τ} c⁰ f⁰_q))`, the log-distance of the ladder from
    /// its long-horizon shape, computed without cancellation:
    /// `ln(1 + Σ_{i≥1} e^{−(λⁱ−λ⁰)τ} (cⁱ gⁱ_q) / (c⁰ f⁰_q))`.
    pub fn transient_log_correction(&self, t: f64) -> Result<Vec<f64>> {
        self.params().check_time(t)?;
        let tau = self.params().horizon() - t;
        let dec = &self.decomposition;
        let lambda0 = dec.ground_value();
        let c0 = self.coefficients[0];
        let ground_log = dec.ground_log();
        let n = self.matrix.dim();
        let mut ratio = vec![0.0; n];
        for i in 1..n {
            let weight =
                (-(dec.eigenvalues()[i] - lambda0) * tau).exp() * self.coefficients[i] / c0;
            if weight == 0.0 {
                continue;
            }
            for (q, r) in ratio.iter_mut().enumerate() {
                // gⁱ_q / f⁰_q, with f⁰_q taken from the log representation
                *r += weight * dec.eigenvector(i)[q] * (-ground_log[q]).exp();
            }
        }
        Ok(ratio.iter().map(|r| r.ln_1p()).collect())
    }
}

/// Backward RK4 solution of `v̇ = M v`, `v(T) = w`, sampled on a uniform grid.
/// Values are kept in log form with periodic rescaling.
#[derive(Debug, Clone)]
pub struct OdeGrid {
    pub times: Vec<f64>,
    /// `log_values[j][i] = ln v_{i−Q}(times[j])`.
    pub log_values: Vec<Vec<f64>>,
    pub step: f64,
}

/// Integrates the ladder ODE from `t = T` back to `t = 0` with classical RK4
/// and step at most `max_step`, recording `samples + 1` equally spaced times
/// `t_j = j·T/samples`.
///
/// Independent of the spectral path; used to cross-check it.
pub fn integrate_ode_oracle(matrix: &LadderMatrix, max_step: f64, samples: usize) -> OdeGrid {
    assert!(max_step > 0.0, "step must be positive");
    assert!(samples >= 1);
    let horizon = matrix.params().horizon();
    let per_sample = (horizon / (samples as f64 * max_step)).ceil().max(1.0) as usize;
    let steps = per_sample * samples;
    let h = horizon / steps as f64;
    let n = matrix.dim();

    let mut v = matrix.terminal().to_vec();
    let mut log_scale = 0.0;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    let mut log_values = vec![Vec::new(); samples + 1];
    let record =
        |v: &[f64], log_scale: f64| -> Vec<f64> { v.iter().map(|x| log_scale + x.ln()).collect() };
    log_values[samples] = record(&v, log_scale);

    // in time-to-go τ the system reads dv/dτ = −M v
    let rhs = |x: &[f64], out: &mut [f64]| {
        matrix.apply(x, out);
        out.iter_mut().for_each(|o| *o = -*o);
    };

    for step in 1..=steps {
        rhs(&v, &mut k1);
        for i in 0..n {
            tmp[i] = v[i] + 0.5 * h * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = v[i] + 0.5 * h * k2[i];
        }
        rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = v[i] + h * k3[i];
        }
        rhs(&tmp, &mut k4);
        for i in 0..n {
            v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }

        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if peak > 1e100 {
            v.iter_mut().for_each(|x| *x /= peak);
            log_scale += peak.ln();
        }
        if step % per_sample == 0 {
            log_values[samples - step / per_sample] = record(&v, log_scale);
        }
    }

    let times = (0..=samples)
        .map(|j| horizon * j as f64 / samples as f64)
        .collect();
    OdeGrid {
        times,
        log_values,
        step: h,
    }
}
