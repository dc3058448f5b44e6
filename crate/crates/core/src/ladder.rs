//! The symmetric tridiagonal generator of the value ladder ODE system.

use crate::params::{ModelParams, Variant};

/// Symmetric tridiagonal matrix `M` and terminal vector `w`, indexed by
/// position `i = q + Q`.
///
/// The off-diagonal is constant, so it is stored once and the matrix is
/// symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderMatrix {
    params: ModelParams,
    variant: Variant,
    diag: Vec<f64>,
    offdiag: f64,
    terminal: Vec<f64>,
}

impl LadderMatrix {
    pub fn build(params: &ModelParams, variant: Variant) -> Self {
        let alpha = params.alpha();
        let beta = params.beta();
        let half_kxi = 0.5 * params.k() * params.xi();
        let q_max = params.q_max();

        let diag = (-q_max..=q_max)
            .map(|q| {
                let q = q as f64;
                match variant {
                    Variant::Drift => alpha * q * q - beta * q,
                    Variant::Base | Variant::Impact => alpha * q * q,
                }
            })
            .collect();
        let offdiag = match variant {
            Variant::Impact => -params.eta() * (-half_kxi).exp(),
            Variant::Base | Variant::Drift => -params.eta(),
        };
        let terminal = (-q_max..=q_max)
            .map(|q| match variant {
                Variant::Impact => (-half_kxi * (q * q) as f64).exp(),
                Variant::Base | Variant::Drift => 1.0,
            })
            .collect();

        LadderMatrix {
            params: *params,
            variant,
            diag,
            offdiag,
            terminal,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
    pub fn variant(&self) -> Variant {
        self.variant
    }
    pub fn dim(&self) -> usize {
        self.diag.len()
    }
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }
    pub fn offdiag(&self) -> f64 {
        self.offdiag
    }
    pub fn terminal(&self) -> &[f64] {
        &self.terminal
    }

    /// Computes `M·x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        assert_eq!(out.len(), n);
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.offdiag * x[i - 1];
            }
            if i + 1 < n {
                acc += self.offdiag * x[i + 1];
            }
            out[i] = acc;
        }
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let neighbours = (i > 0) as u8 + (i + 1 < n) as u8;
                self.diag[i].abs() + neighbours as f64 * self.offdiag.abs()
            })
            .fold(0.0, f64::max)
    }

    /// Quadratic form `xᵀ M x`.
    ///
    /// For the base ladder this is
    /// `Σ αq²x_q² + η Σ (x_{q+1} − x_q)² + η x_Q² + η x_{−Q}² − 2η‖x‖²`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut mx = vec![0.0; self.dim()];
        self.apply(x, &mut mx);
        x.iter().zip(&mx).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamsDraft;

    fn params(q_max: u32) -> ModelParams {
        ParamsDraft {
            q_max,
            ..ParamsDraft::reference()
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn base_three_by_three() {
        let p = params(1);
        let m = LadderMatrix::build(&p, Variant::Base);
        assert_eq!(m.dim(), 3);
        assert!((m.diag()[0] - 0.000135).abs() < 1e-18);
        assert_eq!(m.diag()[1], 0.0);
        assert!((m.diag()[2] - 0.000135).abs() < 1e-18);
        assert!((m.offdiag() + 0.325_678_355_846_731_5).abs() < 1e-15);
        assert_eq!(m.terminal(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn drift_diag_carries_beta() {
        let mut d = ParamsDraft::reference();
        d.mu = 0.02;
        let p = d.validate().unwrap();
        let m = LadderMatrix::build(&p, Variant::Drift);
        let q = 7;
        let expected = p.alpha() * 49.0 - p.beta() * 7.0;
        assert_eq!(m.diag()[p.index_of(q)], expected);
        assert_ne!(m.diag()[p.index_of(q)], m.diag()[p.index_of(-q)]);
    }

    #[test]
    fn impact_scales_coupling_and_terminal() {
        let mut d = ParamsDraft::reference();
        d.xi = 0.5;
        let p = d.validate().unwrap();
        let m = LadderMatrix::build(&p, Variant::Impact);
        assert!((m.offdiag() + p.eta() * (-0.075f64).exp()).abs() < 1e-15);
        assert!((m.terminal()[p.index_of(2)] - (-0.3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn variants_reduce_to_base() {
        let p = params(30);
        let base = LadderMatrix::build(&p, Variant::Base);
        for v in [Variant::Drift, Variant::Impact] {
            let m = LadderMatrix::build(&p, v);
            assert_eq!(m.diag(), base.diag());
            assert_eq!(m.offdiag(), base.offdiag());
            assert_eq!(m.terminal(), base.terminal());
        }
    }

    #[test]
    fn base_diag_even_in_q() {
        let p = params(30);
        let m = LadderMatrix::build(&p, Variant::Base);
        for q in 0..=30 {
            assert_eq!(m.diag()[p.index_of(q)], m.diag()[p.index_of(-q)]);
        }
    }

    #[test]
    fn quadratic_form_matches_rayleigh_expansion() {
        let p = params(4);
        let m = LadderMatrix::build(&p, Variant::Base);
        let x: Vec<f64> = (0..9).map(|i| ((i * 7 % 5) as f64 - 1.5) * 0.3).collect();
        let (alpha, eta) = (p.alpha(), p.eta());
        let mut expected = 0.0;
        for (i, xi) in x.iter().enumerate() {
            let q = p.inventory_at(i) as f64;
            expected += alpha * q * q * xi * xi;
        }
        for w in x.windows(2) {
            expected += eta * (w[1] - w[0]).powi(2);
        }
        expected += eta * (x[0] * x[0] + x[8] * x[8]);
        expected -= 2.0 * eta * x.iter().map(|v| v * v).sum::<f64>();
        assert!((m.quadratic_form(&x) - expected).abs() < 1e-14);
    }
}
