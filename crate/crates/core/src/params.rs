//! Model constants and their validation.
//!
//! Units follow the usual desk convention: prices in Ticks, time in seconds,
//! inventory in unit trade sizes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unvalidated parameter set, as read from a JSON parameter file.
///
/// `mu` and `xi` default to zero (base model) when omitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDraft {
    pub sigma: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub k: f64,
    pub gamma: f64,
    #[serde(default)]
    pub xi: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "Q")]
    pub q_max: u32,
}

impl ParamsDraft {
    /// Reference parameter set:
    /// σ = 0.3, A = 0.9, k = 0.3, γ = 0.01, T = 600, Q = 30.
    pub fn reference() -> Self {
        ParamsDraft {
            sigma: 0.3,
            mu: 0.0,
            a: 0.9,
            k: 0.3,
            gamma: 0.01,
            xi: 0.0,
            horizon: 600.0,
            q_max: 30,
        }
    }

    pub fn validate(self) -> Result<ModelParams> {
        ModelParams::new(self)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

/// Validated model parameters with the derived constants α, η and β.
///
/// Immutable once built; obtain a modified copy through [`ModelParams::draft`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "ParamsDraft")]
pub struct ModelParams {
    draft: ParamsDraft,
    alpha: f64,
    eta: f64,
    beta: f64,
}

impl From<ModelParams> for ParamsDraft {
    fn from(p: ModelParams) -> Self {
        p.draft
    }
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::domain(field, format!("must be finite, got {value}")));
    }
    if value <= 0.0 {
        return Err(Error::domain(field, format!("must be > 0, got {value}")));
    }
    Ok(())
}

impl ModelParams {
    pub fn new(draft: ParamsDraft) -> Result<Self> {
        positive("sigma", draft.sigma)?;
        positive("A", draft.a)?;
        positive("k", draft.k)?;
        positive("gamma", draft.gamma)?;
        positive("T", draft.horizon)?;
        if !draft.mu.is_finite() {
            return Err(Error::domain(
                "mu",
                format!("must be finite, got {}", draft.mu),
            ));
        }
        if !draft.xi.is_finite() || draft.xi < 0.0 {
            return Err(Error::domain(
                "xi",
                format!("must be >= 0, got {}", draft.xi),
            ));
        }
        if draft.q_max == 0 {
            return Err(Error::domain("Q", "inventory bound must be at least 1"));
        }

        let ParamsDraft {
            sigma,
            a,
            k,
            gamma,
            mu,
            ..
        } = draft;
        let alpha = 0.5 * k * gamma * sigma * sigma;
        // exp/log form avoids overflow of (1 + γ/k)^(1 + k/γ) when γ/k is small
        let eta = a * (-(1.0 + k / gamma) * (gamma / k).ln_1p()).exp();
        let beta = k * mu;
        if !(eta > 0.0 && eta < a) {
            return Err(Error::domain(
                "gamma",
                format!("derived eta = {eta} is outside (0, A)"),
            ));
        }
        Ok(ModelParams {
            draft,
            alpha,
            eta,
            beta,
        })
    }

    pub fn draft(&self) -> ParamsDraft {
        self.draft
    }

    pub fn sigma(&self) -> f64 {
        self.draft.sigma
    }
    pub fn mu(&self) -> f64 {
        self.draft.mu
    }
    pub fn a(&self) -> f64 {
        self.draft.a
    }
    pub fn k(&self) -> f64 {
        self.draft.k
    }
    pub fn gamma(&self) -> f64 {
        self.draft.gamma
    }
    pub fn xi(&self) -> f64 {
        self.draft.xi
    }
    pub fn horizon(&self) -> f64 {
        self.draft.horizon
    }
    pub fn q_max(&self) -> i32 {
        self.draft.q_max as i32
    }

    /// α = (k/2)·γ·σ², the inventory penalty rate.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// η = A·(1 + γ/k)^−(1 + k/γ), the effective coupling between neighbouring inventories.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// β = k·μ, the drift contribution to the ladder diagonal.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// (1/γ)·ln(1 + γ/k): the quote offset with no inventory or horizon effect.
    pub fn base_offset(&self) -> f64 {
        (self.gamma() / self.k()).ln_1p() / self.gamma()
    }

    /// √((σ²γ / 2kA)·(1 + γ/k)^(1 + k/γ)), the inventory-skew scale of the
    /// closed-form quote approximations. Equals (1/k)·√(α/η).
    pub fn skew_scale(&self) -> f64 {
        (self.alpha / self.eta).sqrt() / self.k()
    }

    /// Fill intensity A·e^(−kδ) of a quote posted at distance `delta`.
    pub fn intensity(&self, delta: f64) -> f64 {
        self.a() * (-self.k() * delta).exp()
    }

    /// Number of inventory levels, 2Q + 1.
    pub fn dim(&self) -> usize {
        2 * self.draft.q_max as usize + 1
    }

    /// Array position of inventory `q` (i = q + Q).
    pub fn index_of(&self, q: i32) -> usize {
        debug_assert!(q.abs() <= self.q_max());
        (q + self.q_max()) as usize
    }

    pub fn inventory_at(&self, index: usize) -> i32 {
        index as i32 - self.q_max()
    }

    pub fn check_inventory(&self, q: i32) -> Result<()> {
        if q.abs() > self.q_max() {
            return Err(Error::domain(
                "q",
                format!("inventory {q} outside [-{0}, {0}]", self.q_max()),
            ));
        }
        Ok(())
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon()).contains(&t) {
            return Err(Error::domain(
                "t",
                format!("time {t} outside [0, {}]", self.horizon()),
            ));
        }
        Ok(())
    }
}

/// Which dynamics the ladder encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Driftless reference price.
    Base,
    /// Reference price with drift μ.
    Drift,
    /// Reference price moved by ξ against the maker on every fill.
    Impact,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "base" => Ok(Variant::Base),
            "drift" => Ok(Variant::Drift),
            "impact" => Ok(Variant::Impact),
            other => Err(Error::domain(
                "variant",
                format!("unknown variant `{other}`"),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_params_accepted() {
        let p = ParamsDraft::reference().validate().unwrap();
        assert!((p.alpha() - 1.35e-4).abs() < 1e-18);
        assert_eq!(p.beta(), 0.0);
        assert_eq!(p.dim(), 61);
    }

    #[test]
    fn eta_matches_high_precision_value() {
        // 0.9 * (31/30)^-31 evaluated with 50-digit arithmetic
        let p = ParamsDraft::reference().validate().unwrap();
        assert!((p.eta() - 0.325_678_355_846_731_5).abs() < 1e-15);
    }

    #[test]
    fn zero_gamma_rejected() {
        let mut d = ParamsDraft::reference();
        d.gamma = 0.0;
        match d.validate() {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "gamma"),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn each_field_named_in_rejection() {
        #[allow(clippy::type_complexity)]
        let cases: [(fn(&mut ParamsDraft), &str); 7] = [
            (|d| d.sigma = -1.0, "sigma"),
            (|d| d.a = 0.0, "A"),
            (|d| d.k = f64::NAN, "k"),
            (|d| d.horizon = 0.0, "T"),
            (|d| d.xi = -0.1, "xi"),
            (|d| d.q_max = 0, "Q"),
            (|d| d.mu = f64::INFINITY, "mu"),
        ];
        for (mutate, name) in cases {
            let mut d = ParamsDraft::reference();
            mutate(&mut d);
            match d.validate() {
                Err(Error::Domain { field, .. }) => assert_eq!(field, name),
                other => panic!("{name}: expected domain error, got {other:?}"),
            }
        }
    }

    #[test]
    fn eta_stable_for_tiny_gamma() {
        let mut d = ParamsDraft::reference();
        d.gamma = 1e-9;
        let p = d.validate().unwrap();
        // limit γ→0 of A(1+γ/k)^-(1+k/γ) is A/e
        assert!((p.eta() - 0.9 / std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn json_rejects_unknown_keys() {
        let ok = r#"{"sigma":0.3,"mu":0,"A":0.9,"k":0.3,"gamma":0.01,"xi":0,"T":600,"Q":30}"#;
        assert_eq!(
            ParamsDraft::from_json_str(ok).unwrap(),
            ParamsDraft::reference()
        );
        let bad = r#"{"sigma":0.3,"A":0.9,"k":0.3,"gamma":0.01,"T":600,"Q":30,"delta":1}"#;
        assert!(ParamsDraft::from_json_str(bad).is_err());
    }

    #[test]
    fn skew_scale_two_forms_agree() {
        let p = ParamsDraft::reference().validate().unwrap();
        let (s, g, k, a) = (p.sigma(), p.gamma(), p.k(), p.a());
        let direct = ((s * s * g / (2.0 * k * a)) * (1.0 + g / k).powf(1.0 + k / g)).sqrt();
        assert!((p.skew_scale() - direct).abs() < 1e-14);
    }
}
