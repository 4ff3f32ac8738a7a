//! Scenario configuration, read from flat TOML with units in the key names.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::LargeScaleParams;
use crate::error::{Error, Result};
use crate::precoding::PrecoderKind;
use crate::scheduler::{Scope, SchedulerKind};
use crate::topology::grid_side;

/// Which systems a run simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Cf,
    Clcf,
    Both,
}

impl Mode {
    pub fn scopes(&self) -> &'static [Scope] {
        match self {
            Mode::Cf => &[Scope::Cf],
            Mode::Clcf => &[Scope::Clcf],
            Mode::Both => &[Scope::Cf, Scope::Clcf],
        }
    }
}

/// How the power budget is shared in the clustered system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterPower {
    /// Each of the `C` clusters transmits `total_power / C`, so both systems
    /// radiate the same total power.
    Split,
    /// Every cluster transmits the full `total_power`.
    Full,
}

/// Every knob of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Number of single-antenna APs `M`.
    pub ap_count: usize,
    /// Number of users `K`.
    pub user_count: usize,
    /// Number of clusters `C` (a perfect square).
    pub cluster_count: usize,
    /// Users scheduled network-wide `n`.
    pub scheduled_users: usize,
    pub side_length_m: f64,
    /// SNR grid `ρ_f/σ²` in dB.
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    /// Estimate scale `γ`; the error scale is `√(1 − γ²)`.
    pub gamma: f64,
    pub precoder: PrecoderKind,
    pub schedulers: Vec<SchedulerKind>,
    pub mode: Mode,
    /// Largest number of subsets an exhaustive search may visit.
    pub exhaustive_cap: u64,
    /// Transmit power budget of the network.
    pub total_power: f64,
    pub cluster_power: ClusterPower,
    pub noise_power: f64,
    /// Large-scale gains are divided by the unshadowed path-loss gain at this
    /// distance.
    pub reference_distance_m: f64,
    /// Draw a fresh AP deployment in every trial; otherwise one deployment is
    /// shared by all trials.
    pub redraw_aps: bool,
    pub carrier_freq_mhz: f64,
    pub ap_height_m: f64,
    pub user_height_m: f64,
    pub d0_m: f64,
    pub d1_m: f64,
    pub shadowing_std_db: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let ls = LargeScaleParams::default();
        Self {
            ap_count: 64,
            user_count: 256,
            cluster_count: 4,
            scheduled_users: 64,
            side_length_m: 400.0,
            snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            trials: 500,
            master_seed: 1,
            gamma: 0.95f64.sqrt(),
            precoder: PrecoderKind::Mmse,
            schedulers: vec![
                SchedulerKind::Greedy,
                SchedulerKind::Cesg,
                SchedulerKind::Random,
                SchedulerKind::TopPower,
            ],
            mode: Mode::Both,
            exhaustive_cap: 1_000_000,
            total_power: 1.0,
            cluster_power: ClusterPower::Split,
            noise_power: 1.0,
            reference_distance_m: ls.d1_m,
            redraw_aps: true,
            carrier_freq_mhz: ls.carrier_freq_mhz,
            ap_height_m: ls.ap_height_m,
            user_height_m: ls.user_height_m,
            d0_m: ls.d0_m,
            d1_m: ls.d1_m,
            shadowing_std_db: ls.shadowing_std_db,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    pub fn large_scale(&self) -> LargeScaleParams {
        LargeScaleParams {
            carrier_freq_mhz: self.carrier_freq_mhz,
            ap_height_m: self.ap_height_m,
            user_height_m: self.user_height_m,
            d0_m: self.d0_m,
            d1_m: self.d1_m,
            shadowing_std_db: self.shadowing_std_db,
        }
    }

    /// Power budget of one cluster's precoder.
    pub fn precoder_power(&self, scope: Scope) -> f64 {
        match (scope, self.cluster_power) {
            (Scope::Clcf, ClusterPower::Split) => self.total_power / self.cluster_count as f64,
            _ => self.total_power,
        }
    }

    /// Linear `ρ_f` for an SNR in dB.
    pub fn rho_f(&self, snr_db: f64) -> f64 {
        10f64.powf(snr_db / 10.0) * self.noise_power
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.ap_count == 0 || self.user_count == 0 {
            return fail("ap_count and user_count must be positive".into());
        }
        if grid_side(self.cluster_count).is_none() {
            return fail(format!("cluster_count {} is not a perfect square", self.cluster_count));
        }
        if self.scheduled_users == 0 || self.scheduled_users > self.ap_count {
            return fail(format!(
                "scheduled_users must lie in 1..={} (got {})",
                self.ap_count, self.scheduled_users
            ));
        }
        if !(self.side_length_m > 0.0) || !self.side_length_m.is_finite() {
            return fail(format!("side_length_m must be positive, got {}", self.side_length_m));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return fail("snr_db must be a non-empty list of finite values".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return fail(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if self.schedulers.is_empty() {
            return fail("at least one scheduler is required".into());
        }
        let mut sorted = self.schedulers.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.schedulers.len() {
            return fail("schedulers lists a policy twice".into());
        }
        if self.exhaustive_cap == 0 {
            return fail("exhaustive_cap must be positive".into());
        }
        for (name, v) in [
            ("total_power", self.total_power),
            ("noise_power", self.noise_power),
            ("reference_distance_m", self.reference_distance_m),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        self.large_scale().validate()
    }
}
