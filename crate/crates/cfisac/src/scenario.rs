//! Reproducible random network instances: geometry, channels, target
//! parameters.
//!
//! Base stations, users and targets are placed uniformly in a disc of radius
//! `radius` around the origin. Small-scale fading on the BS-user and BS-BS
//! links is i.i.d. Rayleigh on top of a distance power law; the BS-target
//! links carry their (amplitude-domain) path loss inside the steering
//! vectors, while the radar cross sections are complex Gaussian draws.

use crate::error::{Error, Result};
use crate::units::{db_to_linear, dbm_to_watts};
use crate::{conv, CMat, CVec, Cplx, Real};
use num_traits::Float;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// All scalar parameters of the network.
///
/// Linear units throughout: powers in watts, SINR targets as linear ratios,
/// distances in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig<T> {
    /// Number of base stations `J`.
    pub num_bs: usize,
    /// Number of single-antenna users `K`.
    pub num_users: usize,
    /// Number of point targets `L`.
    pub num_targets: usize,
    /// Antennas per BS `M` (uniform linear array).
    pub antennas_per_bs: usize,
    /// Antenna spacing `d` in meters.
    pub spacing: T,
    /// Carrier wavelength `lambda` in meters.
    pub wavelength: T,
    /// RCS variance `sigma_t_sq` (linear).
    pub rcs_var: T,
    /// Sensing noise power `sigma_r_sq` in watts.
    pub sensing_noise: T,
    /// Communication noise power `sigma_c_sq` in watts.
    pub comm_noise: T,
    /// Per-user SINR targets `gamma` (linear), length `K`.
    pub sinr_targets: Vec<T>,
    /// Total transmit power budget `p_max` in watts.
    pub power_budget: T,
    /// Deployment circle radius in meters.
    pub radius: T,
    /// Path-loss exponent of BS-target links.
    pub pl_exp_bt: T,
    /// Path-loss exponent of BS-user links.
    pub pl_exp_bu: T,
    /// Path-loss exponent of BS-BS links.
    pub pl_exp_bb: T,
    /// Reference path gain at 1 m (linear power ratio).
    pub ref_gain: T,
    /// Base seed for reproduction.
    pub seed: u64,
}

/// On-disk form of [`NetworkConfig`]. Field names follow the JSON contract;
/// noise powers, the power budget and the SINR targets may instead be given
/// in dB via the `_dbm` / `_db` suffixed keys.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "J")]
    j: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "M")]
    m: usize,
    lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_t_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_r_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_r_sq_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_c_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_c_sq_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<GammaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_db: Option<GammaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_max_dbm: Option<f64>,
    radius: f64,
    pl_exp_bt: f64,
    pl_exp_bu: f64,
    pl_exp_bb: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ref_gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

/// SINR targets in config files: one value for all users or one per user.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum GammaSpec {
    Common(f64),
    PerUser(Vec<f64>),
}

impl GammaSpec {
    fn resolve(&self, k: usize) -> Result<Vec<f64>> {
        match self {
            GammaSpec::Common(g) => Ok(vec![*g; k]),
            GammaSpec::PerUser(v) => {
                if v.len() == k {
                    Ok(v.clone())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "gamma has {} entries but K = {}",
                        v.len(),
                        k
                    )))
                }
            }
        }
    }
}

fn exactly_one(
    name: &str,
    linear: Option<f64>,
    db: Option<f64>,
    to_linear: fn(f64) -> f64,
) -> Result<f64> {
    match (linear, db) {
        (Some(v), None) => Ok(v),
        (None, Some(v)) => Ok(to_linear(v)),
        (Some(_), Some(_)) => Err(Error::InvalidConfig(format!(
            "both {name} and its dB variant are set"
        ))),
        (None, None) => Err(Error::InvalidConfig(format!("{name} is missing"))),
    }
}

impl RawConfig {
    fn build(self) -> Result<NetworkConfig<f64>> {
        let sigma_r_sq = exactly_one(
            "sigma_r_sq",
            self.sigma_r_sq,
            self.sigma_r_sq_dbm,
            dbm_to_watts,
        )?;
        let sigma_c_sq = exactly_one(
            "sigma_c_sq",
            self.sigma_c_sq,
            self.sigma_c_sq_dbm,
            dbm_to_watts,
        )?;
        let p_max = exactly_one("p_max", self.p_max, self.p_max_dbm, dbm_to_watts)?;
        let gamma = match (&self.gamma, &self.gamma_db) {
            (Some(g), None) => g.resolve(self.k)?,
            (None, Some(g)) => g
                .resolve(self.k)?
                .into_iter()
                .map(db_to_linear)
                .collect(),
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig(
                    "both gamma and gamma_db are set".into(),
                ))
            }
            (None, None) => return Err(Error::InvalidConfig("gamma is missing".into())),
        };
        let cfg = NetworkConfig {
            num_bs: self.j,
            num_users: self.k,
            num_targets: self.l,
            antennas_per_bs: self.m,
            spacing: self.d.unwrap_or(self.lambda / 2.0),
            wavelength: self.lambda,
            rcs_var: self.sigma_t_sq.unwrap_or(1.0),
            sensing_noise: sigma_r_sq,
            comm_noise: sigma_c_sq,
            sinr_targets: gamma,
            power_budget: p_max,
            radius: self.radius,
            pl_exp_bt: self.pl_exp_bt,
            pl_exp_bu: self.pl_exp_bu,
            pl_exp_bb: self.pl_exp_bb,
            ref_gain: self.ref_gain.unwrap_or(1e-3),
            seed: self.seed.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl NetworkConfig<f64> {
    /// Parses a config from its JSON document.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(s)?;
        raw.build()
    }

    /// Reads and parses a JSON config file.
    pub fn from_json_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Serializes to the canonical JSON document (all values linear).
    pub fn to_json_string(&self) -> Result<String> {
        let raw = RawConfig {
            j: self.num_bs,
            k: self.num_users,
            l: self.num_targets,
            m: self.antennas_per_bs,
            lambda: self.wavelength,
            d: Some(self.spacing),
            sigma_t_sq: Some(self.rcs_var),
            sigma_r_sq: Some(self.sensing_noise),
            sigma_r_sq_dbm: None,
            sigma_c_sq: Some(self.comm_noise),
            sigma_c_sq_dbm: None,
            gamma: Some(GammaSpec::PerUser(self.sinr_targets.clone())),
            gamma_db: None,
            p_max: Some(self.power_budget),
            p_max_dbm: None,
            radius: self.radius,
            pl_exp_bt: self.pl_exp_bt,
            pl_exp_bu: self.pl_exp_bu,
            pl_exp_bb: self.pl_exp_bb,
            ref_gain: Some(self.ref_gain),
            seed: Some(self.seed),
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }
}

impl<T: Real> NetworkConfig<T> {
    /// A small instance that runs in seconds: `J = 6`, `M = 2`, `K = 3`,
    /// `L = 2`, 8 dB SINR targets, 30 dBm budget, -80 dBm noise floors.
    pub fn desk_scale() -> Self {
        Self::with_dims(6, 2, 3, 2)
    }

    /// The full-size instance: `J = 16`, `M = 4`, `K = 8`, `L = 3`.
    pub fn paper_scale() -> Self {
        Self::with_dims(16, 4, 8, 3)
    }

    /// Uniform-target instance with the standard propagation parameters and
    /// the given counts.
    pub fn with_dims(num_bs: usize, antennas_per_bs: usize, num_users: usize, num_targets: usize) -> Self {
        let lambda = conv::<T>(0.1);
        NetworkConfig {
            num_bs,
            num_users,
            num_targets,
            antennas_per_bs,
            spacing: lambda / conv(2.0),
            wavelength: lambda,
            rcs_var: T::one(),
            sensing_noise: conv(1e-11),
            comm_noise: conv(1e-11),
            sinr_targets: vec![conv(db_to_linear(8.0)); num_users],
            power_budget: T::one(),
            radius: conv(100.0),
            pl_exp_bt: conv(2.2),
            pl_exp_bu: conv(2.5),
            pl_exp_bb: conv(3.8),
            ref_gain: conv(1e-3),
            seed: 0,
        }
    }

    /// Returns a copy with every SINR target set to the same dB value.
    pub fn with_common_sinr_db(mut self, gamma_db: f64) -> Self {
        self.sinr_targets = vec![conv(db_to_linear(gamma_db)); self.num_users];
        self
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.num_bs < 2 {
            return fail("J must be at least 2");
        }
        if self.num_users < 1 || self.num_targets < 1 || self.antennas_per_bs < 1 {
            return fail("K, L and M must be at least 1");
        }
        if self.num_bs * self.antennas_per_bs <= self.num_users {
            return fail("J*M must exceed K");
        }
        if self.sinr_targets.len() != self.num_users {
            return fail("gamma must have K entries");
        }
        let pos = [
            self.spacing,
            self.wavelength,
            self.rcs_var,
            self.sensing_noise,
            self.comm_noise,
            self.power_budget,
            self.radius,
            self.pl_exp_bt,
            self.pl_exp_bu,
            self.pl_exp_bb,
            self.ref_gain,
        ];
        if pos.iter().any(|&v| !(v > T::zero()) || !Float::is_finite(v)) {
            return fail("all physical parameters must be strictly positive and finite");
        }
        if self
            .sinr_targets
            .iter()
            .any(|&g| !(g > T::zero()) || !Float::is_finite(g))
        {
            return fail("all SINR targets must be strictly positive and finite");
        }
        Ok(())
    }

    /// Converts the scalar type, e.g. to run a config at `f32`.
    pub fn cast<U: Real>(&self) -> NetworkConfig<U> {
        let c = |x: T| U::from_f64(x.to_f64().unwrap()).unwrap();
        NetworkConfig {
            num_bs: self.num_bs,
            num_users: self.num_users,
            num_targets: self.num_targets,
            antennas_per_bs: self.antennas_per_bs,
            spacing: c(self.spacing),
            wavelength: c(self.wavelength),
            rcs_var: c(self.rcs_var),
            sensing_noise: c(self.sensing_noise),
            comm_noise: c(self.comm_noise),
            sinr_targets: self.sinr_targets.iter().map(|&g| c(g)).collect(),
            power_budget: c(self.power_budget),
            radius: c(self.radius),
            pl_exp_bt: c(self.pl_exp_bt),
            pl_exp_bu: c(self.pl_exp_bu),
            pl_exp_bb: c(self.pl_exp_bb),
            ref_gain: c(self.ref_gain),
            seed: self.seed,
        }
    }
}

/// One random draw of the network: positions, channels and target parameters.
///
/// Immutable after creation; carries its [`NetworkConfig`] so model
/// evaluations need no extra arguments.
#[derive(Debug, Clone)]
pub struct Scenario<T: Real> {
    /// Generating configuration.
    pub config: NetworkConfig<T>,
    /// BS positions, `J` points.
    pub bs_pos: Vec<[T; 2]>,
    /// User positions, `K` points.
    pub user_pos: Vec<[T; 2]>,
    /// Target positions, `L` points.
    pub target_pos: Vec<[T; 2]>,
    /// `user_channels[j][k]`: channel from BS `j` to user `k`, length `M`.
    pub user_channels: Vec<Vec<CVec<T>>>,
    /// `cross_channels[i][j]`: `M x M` channel from (transmit) BS `i` to
    /// (receive) BS `j`; exactly zero when `i == j`.
    pub cross_channels: Vec<Vec<CMat<T>>>,
    /// `target_angles[j][l]`: azimuth of target `l` seen from BS `j`,
    /// measured from the common array broadside.
    pub target_angles: Vec<Vec<T>>,
    /// `target_gains[j][l]`: one-way amplitude path gain of the BS `j` /
    /// target `l` link, strictly positive.
    pub target_gains: Vec<Vec<T>>,
    /// `rcs[j][i][l]`: complex RCS draw coupling transmit BS `i`, target `l`
    /// and receive BS `j`.
    pub rcs: Vec<Vec<Vec<Cplx<T>>>>,
}

impl<T: Real> Scenario<T> {
    /// Total antenna count `J * M`.
    pub fn stacked_dim(&self) -> usize {
        self.config.num_bs * self.config.antennas_per_bs
    }

    /// Steering vector of BS `j` toward target `l`, including the one-way
    /// amplitude path gain.
    pub fn steering(&self, j: usize, l: usize) -> CVec<T> {
        steering_vector(
            self.target_angles[j][l],
            self.target_gains[j][l],
            self.config.antennas_per_bs,
            self.config.spacing,
            self.config.wavelength,
        )
    }
}

/// Distance-dependent power-law path gain: `ref_gain * dist^(-exponent)`,
/// with the distance clamped below at 1 m.
pub fn path_gain<T: Real>(dist: T, exponent: T, ref_gain: T) -> Result<T> {
    if !(dist > T::zero()) {
        return Err(Error::InvalidArgument(
            "path_gain requires a positive distance".into(),
        ));
    }
    let d = if dist < T::one() { T::one() } else { dist };
    Ok(ref_gain * Float::powf(d, -exponent))
}

/// ULA steering vector toward azimuth `theta`, scaled by the amplitude gain
/// `beta`: entry `m` is `beta * exp(i 2 pi / lambda * m * d * sin(theta))`.
pub fn steering_vector<T: Real>(theta: T, beta: T, m: usize, d: T, lambda: T) -> CVec<T> {
    let two_pi = conv::<T>(2.0) * T::pi();
    let step = two_pi / lambda * d * Float::sin(theta);
    CVec::from_fn(m, |row, _| {
        Cplx::from_polar(beta, step * conv::<T>(row as f64))
    })
}

fn dist2d<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    Float::hypot(a[0] - b[0], a[1] - b[1])
}

/// Draw-stream categories. Every random quantity is keyed by its entity
/// indices, so a network with more BSs or users extends a smaller one
/// instead of reshuffling it; sweeps over the counts then compare paired
/// geometries. Stream 1 is reserved for the random mode baseline.
mod stream {
    pub const BS_POS: u64 = 2;
    pub const USER_POS: u64 = 3;
    pub const TARGET_POS: u64 = 4;
    pub const USER_CHANNEL: u64 = 5;
    pub const CROSS_CHANNEL: u64 = 6;
    pub const RCS: u64 = 7;
}

fn keyed_rng(seed: u64, category: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((category << 56) | (a << 28) | b);
    rng
}

fn draw_disc_point<T: Real>(radius: T, rng: &mut ChaCha8Rng) -> [T; 2] {
    let r = radius * Float::sqrt(conv::<T>(rng.random::<f64>()));
    let phi = conv::<T>(2.0) * T::pi() * conv::<T>(rng.random::<f64>());
    [r * Float::cos(phi), r * Float::sin(phi)]
}

/// One standard circularly-symmetric complex Gaussian draw scaled to the
/// given variance.
fn draw_cn<T: Real>(var: f64, rng: &mut ChaCha8Rng) -> Cplx<T> {
    let std = (var / 2.0).sqrt();
    let re: f64 = rng.sample(rand_distr::StandardNormal);
    let im: f64 = rng.sample(rand_distr::StandardNormal);
    Cplx::new(conv(re * std), conv(im * std))
}

/// Draws a scenario. Identical `(config, seed)` pairs give bit-identical
/// scenarios; the draw is independent of the config's own `seed` field.
pub fn generate_scenario<T: Real>(config: &NetworkConfig<T>, seed: u64) -> Result<Scenario<T>> {
    config.validate()?;
    let (j_n, k_n, l_n, m_n) = (
        config.num_bs,
        config.num_users,
        config.num_targets,
        config.antennas_per_bs,
    );

    let place = |category: u64, idx: usize| -> [T; 2] {
        draw_disc_point(
            config.radius,
            &mut keyed_rng(seed, category, idx as u64, 0),
        )
    };
    let bs_pos: Vec<_> = (0..j_n).map(|j| place(stream::BS_POS, j)).collect();
    let user_pos: Vec<_> = (0..k_n).map(|k| place(stream::USER_POS, k)).collect();
    let target_pos: Vec<_> = (0..l_n).map(|l| place(stream::TARGET_POS, l)).collect();

    let mut user_channels = Vec::with_capacity(j_n);
    for j in 0..j_n {
        let mut per_bs = Vec::with_capacity(k_n);
        for k in 0..k_n {
            let gain = path_gain(
                dist2d(bs_pos[j], user_pos[k]),
                config.pl_exp_bu,
                config.ref_gain,
            )?;
            let amp = Float::sqrt(gain);
            let mut rng = keyed_rng(seed, stream::USER_CHANNEL, j as u64, k as u64);
            let mut h = CVec::zeros(m_n);
            for a in 0..m_n {
                h[a] = draw_cn::<T>(1.0, &mut rng) * Cplx::new(amp, T::zero());
            }
            per_bs.push(h);
        }
        user_channels.push(per_bs);
    }

    let mut cross_channels = Vec::with_capacity(j_n);
    for i in 0..j_n {
        let mut per_tx = Vec::with_capacity(j_n);
        for j in 0..j_n {
            if i == j {
                per_tx.push(CMat::zeros(m_n, m_n));
                continue;
            }
            let gain = path_gain(
                dist2d(bs_pos[i], bs_pos[j]),
                config.pl_exp_bb,
                config.ref_gain,
            )?;
            let amp = Float::sqrt(gain);
            let mut rng = keyed_rng(seed, stream::CROSS_CHANNEL, i as u64, j as u64);
            let mut g = CMat::zeros(m_n, m_n);
            for r in 0..m_n {
                for c in 0..m_n {
                    g[(r, c)] = draw_cn::<T>(1.0, &mut rng) * Cplx::new(amp, T::zero());
                }
            }
            per_tx.push(g);
        }
        cross_channels.push(per_tx);
    }

    let mut target_angles = Vec::with_capacity(j_n);
    let mut target_gains = Vec::with_capacity(j_n);
    for j in 0..j_n {
        let mut angles = Vec::with_capacity(l_n);
        let mut gains = Vec::with_capacity(l_n);
        for l in 0..l_n {
            let dx = target_pos[l][0] - bs_pos[j][0];
            let dy = target_pos[l][1] - bs_pos[j][1];
            angles.push(Float::atan2(dx, dy));
            let gain = path_gain(
                dist2d(bs_pos[j], target_pos[l]),
                config.pl_exp_bt,
                config.ref_gain,
            )?;
            gains.push(Float::sqrt(gain));
        }
        target_angles.push(angles);
        target_gains.push(gains);
    }

    let var_t = config.rcs_var.to_f64().unwrap();
    let mut rcs = Vec::with_capacity(j_n);
    for j in 0..j_n {
        let mut per_rx = Vec::with_capacity(j_n);
        for i in 0..j_n {
            let mut rng = keyed_rng(seed, stream::RCS, j as u64, i as u64);
            let per_pair: Vec<Cplx<T>> =
                (0..l_n).map(|_| draw_cn::<T>(var_t, &mut rng)).collect();
            per_rx.push(per_pair);
        }
        rcs.push(per_rx);
    }

    Ok(Scenario {
        config: config.clone(),
        bs_pos,
        user_pos,
        target_pos,
        user_channels,
        cross_channels,
        target_angles,
        target_gains,
        rcs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Cplx<f64>;

    #[test]
    fn path_gain_basics() {
        assert_eq!(path_gain(1.0, 3.0, 0.5).unwrap(), 0.5);
        assert!((path_gain(100.0, 2.0, 1.0).unwrap() - 1e-4).abs() < 1e-18);
        assert!(path_gain(0.0, 2.0, 1.0).is_err());
        assert!(path_gain(-3.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn path_gain_clamps_below_one_meter() {
        let clamped = path_gain(0.5, 2.7, 1e-3).unwrap();
        let at_one = 1e-3 * 1.0f64.powf(-2.7);
        assert_eq!(clamped, at_one);
        // direct evaluation without the clamp would differ
        assert!((1e-3 * 0.5f64.powf(-2.7) - clamped).abs() > 1e-4);
    }

    #[test]
    fn steering_zero_angle_is_all_ones() {
        let a = steering_vector(0.0, 0.7, 4, 0.05, 0.1);
        for m in 0..4 {
            assert!((a[m] - C::new(0.7, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn steering_half_wavelength_30_degrees() {
        // d = lambda/2, sin(pi/6) = 1/2 -> phase step pi/2
        let beta = 1.3;
        let a = steering_vector(std::f64::consts::FRAC_PI_6, beta, 2, 0.05, 0.1);
        assert!((a[0] - C::new(beta, 0.0)).norm() < 1e-12);
        assert!((a[1] - C::new(0.0, beta)).norm() < 1e-12);
    }

    #[test]
    fn steering_single_element() {
        let a = steering_vector(1.1, 0.4, 1, 0.05, 0.1);
        assert_eq!(a.len(), 1);
        assert!((a[0] - C::new(0.4, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn steering_norm_matches_beta_sqrt_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let theta = rng.random::<f64>() * 6.0 - 3.0;
            let beta = rng.random::<f64>() * 2.0 + 1e-3;
            let m = 1 + (rng.random::<u32>() % 8) as usize;
            let a = steering_vector(theta, beta, m, 0.05, 0.1);
            let want = beta * (m as f64).sqrt();
            assert!((a.norm() - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = NetworkConfig::<f64>::desk_scale();
        let a = generate_scenario(&cfg, 42).unwrap();
        let b = generate_scenario(&cfg, 42).unwrap();
        assert_eq!(a.bs_pos, b.bs_pos);
        assert_eq!(a.user_pos, b.user_pos);
        assert_eq!(a.target_pos, b.target_pos);
        assert_eq!(a.user_channels, b.user_channels);
        assert_eq!(a.cross_channels, b.cross_channels);
        assert_eq!(a.target_angles, b.target_angles);
        assert_eq!(a.target_gains, b.target_gains);
        assert_eq!(a.rcs, b.rcs);
        let c = generate_scenario(&cfg, 43).unwrap();
        assert_ne!(a.bs_pos, c.bs_pos);
    }

    #[test]
    fn growing_the_network_extends_the_draw() {
        // common random numbers: raising J or K keeps existing entities
        let small = generate_scenario(&NetworkConfig::<f64>::with_dims(4, 2, 2, 2), 9).unwrap();
        let big = generate_scenario(&NetworkConfig::<f64>::with_dims(6, 2, 3, 2), 9).unwrap();
        assert_eq!(small.bs_pos[..], big.bs_pos[..4]);
        assert_eq!(small.user_pos[..], big.user_pos[..2]);
        assert_eq!(small.target_pos, big.target_pos);
        for j in 0..4 {
            for k in 0..2 {
                assert_eq!(small.user_channels[j][k], big.user_channels[j][k]);
            }
            for i in 0..4 {
                assert_eq!(small.cross_channels[i][j], big.cross_channels[i][j]);
                assert_eq!(small.rcs[j][i], big.rcs[j][i]);
            }
        }
    }

    #[test]
    fn inter_bs_diagonal_is_zero() {
        let cfg = NetworkConfig::<f64>::with_dims(2, 2, 1, 1);
        let s = generate_scenario(&cfg, 0).unwrap();
        for i in 0..2 {
            assert!(s.cross_channels[i][i].iter().all(|z| *z == C::new(0.0, 0.0)));
        }
        assert!(s.cross_channels[0][1].iter().any(|z| z.norm() > 0.0));
    }

    #[test]
    fn paper_scale_dimensions() {
        let cfg = NetworkConfig::<f64>::paper_scale();
        assert_eq!(cfg.sensing_noise, 1e-11);
        assert_eq!(cfg.comm_noise, 1e-11);
        assert_eq!(cfg.power_budget, 1.0);
        let s = generate_scenario(&cfg, 7).unwrap();
        assert_eq!(s.user_channels.len(), 16);
        assert_eq!(s.user_channels[0].len(), 8);
        assert_eq!(s.user_channels[0][0].len(), 4);
        assert_eq!(s.target_angles.len(), 16);
        assert_eq!(s.target_angles[0].len(), 3);
        let r = cfg.radius;
        for p in s.bs_pos.iter().chain(&s.user_pos).chain(&s.target_pos) {
            assert!(p[0].hypot(p[1]) <= r + 1e-9);
        }
        for gains in &s.target_gains {
            assert!(gains.iter().all(|&b| b > 0.0));
        }
    }

    #[test]
    fn rcs_variance_matches_config() {
        let mut cfg = NetworkConfig::<f64>::with_dims(10, 1, 1, 1000);
        cfg.rcs_var = 0.37;
        let s = generate_scenario(&cfg, 11).unwrap();
        let mut sum = 0.0;
        let mut n = 0usize;
        for per_rx in &s.rcs {
            for per_pair in per_rx {
                for z in per_pair {
                    sum += z.norm_sqr();
                    n += 1;
                }
            }
        }
        assert_eq!(n, 100_000);
        let var = sum / n as f64;
        assert!((var - 0.37).abs() < 0.05 * 0.37, "empirical var {var}");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = NetworkConfig::<f64>::desk_scale();
        cfg.num_bs = 1;
        assert!(matches!(generate_scenario(&cfg, 0), Err(Error::InvalidConfig(_))));
        let mut cfg = NetworkConfig::<f64>::with_dims(2, 1, 2, 1);
        cfg.num_users = 2; // J*M = 2 = K
        assert!(cfg.validate().is_err());
        let mut cfg = NetworkConfig::<f64>::desk_scale();
        cfg.comm_noise = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = NetworkConfig::<f64>::desk_scale();
        cfg.sinr_targets[1] = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn json_round_trip_and_db_suffixes() {
        let text = r#"{
            "J": 6, "K": 3, "L": 2, "M": 2,
            "lambda": 0.1,
            "sigma_t_sq": 1.0,
            "sigma_r_sq_dbm": -80.0,
            "sigma_c_sq_dbm": -80.0,
            "gamma_db": 8.0,
            "p_max_dbm": 30.0,
            "radius": 100.0,
            "pl_exp_bt": 2.2, "pl_exp_bu": 2.5, "pl_exp_bb": 3.8,
            "seed": 5
        }"#;
        let cfg = NetworkConfig::from_json_str(text).unwrap();
        assert_eq!(cfg.spacing, 0.05);
        assert!((cfg.sensing_noise - 1e-11).abs() < 1e-24);
        assert!((cfg.power_budget - 1.0).abs() < 1e-12);
        assert!((cfg.sinr_targets[0] - db_to_linear(8.0)).abs() < 1e-12);
        assert_eq!(cfg.ref_gain, 1e-3);
        assert_eq!(cfg.seed, 5);

        let reparsed = NetworkConfig::from_json_str(&cfg.to_json_string().unwrap()).unwrap();
        assert_eq!(cfg, reparsed);

        let conflicting = text.replace("\"p_max_dbm\": 30.0", "\"p_max_dbm\": 30.0, \"p_max\": 1.0");
        assert!(NetworkConfig::from_json_str(&conflicting).is_err());
        let unknown = text.replace("\"seed\": 5", "\"seed\": 5, \"bogus\": 1");
        assert!(NetworkConfig::from_json_str(&unknown).is_err());
    }
}
