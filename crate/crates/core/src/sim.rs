//! Monte Carlo rates of an SLS scheme at finite transmit power.
//!
//! Each trial draws real fading coefficients once and reuses them across the
//! power grid. Receivers decode their layers in the scheme's order with
//! successive cancellation, treating every other undecoded layer as noise.

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::to_f64;
use crate::regions::Variant;
use crate::sls::sinr::{attenuated_antenna, decoding_order, load_of, Layer};
use crate::sls::{sinr_exponents, SlsError, SlsScheme};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("scheme is not SINR-feasible: {0}")]
    Infeasible(String),
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
    #[error("slope estimate needs at least two power values")]
    TooFewPoints,
    #[error(transparent)]
    Sls(#[from] SlsError),
}

/// Fading amplitude distribution; bounded with a bounded density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fading {
    Uniform { lo: f64, hi: f64 },
}

impl Default for Fading {
    fn default() -> Self {
        Fading::Uniform { lo: 0.5, hi: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub p_grid: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub fading: Fading,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            p_grid: vec![1e4, 1e6, 1e8, 1e10],
            trials: 200,
            fading: Fading::default(),
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::BadConfig(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.p_grid.is_empty() {
            return bad("power grid is empty");
        }
        if self.p_grid.iter().any(|p| !p.is_finite() || *p <= 1.0) {
            return bad("every power must be finite and above 1");
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("power grid must be strictly ascending");
        }
        match self.fading {
            Fading::Uniform { lo, hi } if lo.is_finite() && hi.is_finite() && lo < hi => Ok(()),
            Fading::Uniform { .. } => bad("uniform fading needs finite lo < hi"),
        }
    }
}

/// Mean normalized rate of one layer at one receiver and power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStat {
    pub p: f64,
    /// 1-based.
    pub receiver: usize,
    pub layer: Layer,
    pub mean_normalized_rate: f64,
    pub design_load: f64,
    /// Shortfall of the normalized rate below the load, floored at 0.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserStat {
    pub p: f64,
    /// 1-based.
    pub user: usize,
    /// Mean delivered rate in units of `½ ln`, i.e. comparable to `½ ln P`.
    pub mean_rate: f64,
    pub normalized_rate: f64,
    pub design_gdof: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub variant: Variant,
    pub layers: Vec<LayerStat>,
    pub users: Vec<UserStat>,
}

/// Linear power of each layer, with the top layer floored at zero.
fn layer_powers(p: f64, lambda: f64, lambda_p: f64) -> [(Layer, f64); 5] {
    let pl = p.powf(-lambda);
    let pll = p.powf(-lambda - lambda_p);
    [
        (Layer::X123, (1.0 - 2.0 * pl).max(0.0)),
        (Layer::X12, pl),
        (Layer::X1, pll),
        (Layer::X2, pll),
        (Layer::X3, pl),
    ]
}

struct Setup {
    alpha: [[f64; 3]; 3],
    lambda: f64,
    lambda_p: f64,
    gamma_p: f64,
    attenuated: usize,
    loads: [f64; 5],
    mu: [f64; 2],
    xi: [f64; 3],
}

fn layer_index(l: Layer) -> usize {
    Layer::ALL.iter().position(|&x| x == l).expect("known layer")
}

/// `½ ln(1 + SINR)` for each (receiver, position in decoding order), with
/// the layers in `silenced` switched off.
fn capacities(s: &Setup, g: &[[f64; 3]; 3], p: f64, silenced: &[Layer]) -> Vec<Vec<f64>> {
    let powers = layer_powers(p, s.lambda, s.lambda_p);
    let amp = |m: usize| if m == s.attenuated { p.powf(-s.gamma_p / 2.0) } else { 1.0 };
    (0..3)
        .map(|k| {
            let received: Vec<f64> = powers
                .iter()
                .map(|&(l, pw)| {
                    if silenced.contains(&l) {
                        return 0.0;
                    }
                    let h: f64 = l.antennas().iter().map(|&m| p.powf(s.alpha[k][m] / 2.0) * g[k][m] * amp(m)).sum();
                    h * h * pw
                })
                .collect();
            let order = decoding_order(k);
            order
                .iter()
                .enumerate()
                .map(|(pos, &l)| {
                    let me = layer_index(l);
                    let noise: f64 = Layer::ALL
                        .iter()
                        .enumerate()
                        .filter(|&(i, x)| i != me && !order[..pos].contains(x))
                        .map(|(i, _)| received[i])
                        .sum();
                    0.5 * (received[me] / (1.0 + noise)).ln_1p()
                })
                .collect()
        })
        .collect()
}

struct TrialOut {
    /// Per power, receiver, decoding position: normalized rate.
    layer_rates: Vec<Vec<Vec<f64>>>,
    /// Per power and user: delivered rate.
    user_rates: Vec<[f64; 3]>,
}

fn run_trial(s: &Setup, cfg: &SimConfig, g: &[[f64; 3]; 3]) -> TrialOut {
    let mut layer_rates = Vec::new();
    let mut user_rates = Vec::new();
    for &p in &cfg.p_grid {
        let half_log_p = 0.5 * p.ln();
        let caps = capacities(s, g, p, &[]);
        let mut delivered = [f64::INFINITY; 5];
        for (k, row) in caps.iter().enumerate() {
            for (pos, &l) in decoding_order(k).iter().enumerate() {
                let i = layer_index(l);
                delivered[i] = delivered[i].min(row[pos]);
            }
        }
        for (i, d) in delivered.iter_mut().enumerate() {
            *d = d.min(s.loads[i] * half_log_p);
        }
        let [x123, x12, x1, x2, x3] = delivered;
        user_rates.push([
            x1 + s.mu[0] * x12 + s.xi[0] * x123,
            x2 + s.mu[1] * x12 + s.xi[1] * x123,
            x3 + s.xi[2] * x123,
        ]);
        layer_rates.push(
            caps.into_iter()
                .map(|row| row.into_iter().map(|c| c / half_log_p).collect())
                .collect(),
        );
    }
    TrialOut { layer_rates, user_rates }
}

fn draw_fading(cfg: &SimConfig, trial: usize) -> [[f64; 3]; 3] {
    let Fading::Uniform { lo, hi } = cfg.fading;
    let dist = Uniform::new(lo, hi).expect("validated bounds");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let mut g = [[0.0; 3]; 3];
    for row in g.iter_mut() {
        for x in row.iter_mut() {
            *x = dist.sample(&mut rng);
        }
    }
    g
}

fn setup(s: &SlsScheme) -> Setup {
    let f = |r: &crate::Rational| to_f64(r);
    let mut alpha = [[0.0; 3]; 3];
    for (k, row) in alpha.iter_mut().enumerate() {
        for (m, x) in row.iter_mut().enumerate() {
            *x = f(s.channel.alpha(k, m));
        }
    }
    let p = s.params.as_array();
    let mut loads = [0.0; 5];
    for (i, &l) in Layer::ALL.iter().enumerate() {
        loads[i] = f(&load_of(&s.split, l));
    }
    Setup {
        alpha,
        lambda: f(p[0]),
        lambda_p: f(p[1]),
        gamma_p: f(p[3]),
        attenuated: attenuated_antenna(s.variant),
        loads,
        mu: [f(&s.split.mu[0]), f(&s.split.mu[1])],
        xi: [f(&s.split.xi[0]), f(&s.split.xi[1]), f(&s.split.xi[2])],
    }
}

/// Simulates a SINR-feasible scheme over the configured power grid.
pub fn simulate_scheme(s: &SlsScheme, cfg: &SimConfig) -> Result<SimResult, SimError> {
    cfg.validate()?;
    let report = sinr_exponents(s)?;
    if !report.feasible {
        let bad: Vec<String> = report
            .entries
            .iter()
            .filter(|e| !e.ok)
            .map(|e| format!("rx{} {}", e.receiver, e.layer.name()))
            .collect();
        return Err(SimError::Infeasible(bad.join(", ")));
    }
    let st = setup(s);
    let design = s.split.induced()?;
    let trials: Vec<TrialOut> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(&st, cfg, &draw_fading(cfg, t)))
        .collect();
    let n = cfg.trials as f64;
    let mut layers = Vec::new();
    let mut users = Vec::new();
    for (pi, &p) in cfg.p_grid.iter().enumerate() {
        for k in 0..3 {
            for (pos, &l) in decoding_order(k).iter().enumerate() {
                let mean = trials.iter().map(|t| t.layer_rates[pi][k][pos]).sum::<f64>() / n;
                let load = st.loads[layer_index(l)];
                layers.push(LayerStat {
                    p,
                    receiver: k + 1,
                    layer: l,
                    mean_normalized_rate: mean,
                    design_load: load,
                    gap: (load - mean).max(0.0),
                });
            }
        }
        let half_log_p = 0.5 * p.ln();
        for k in 0..3 {
            let mean = trials.iter().map(|t| t.user_rates[pi][k]).sum::<f64>() / n;
            users.push(UserStat {
                p,
                user: k + 1,
                mean_rate: mean,
                normalized_rate: mean / half_log_p,
                design_gdof: to_f64(&design[k]),
            });
        }
    }
    Ok(SimResult {
        config: cfg.clone(),
        variant: s.variant,
        layers,
        users,
    })
}

/// Per-user GDoF estimate: slope of the mean rate against `½ ln P` between
/// the two largest powers.
pub fn slope_estimate(r: &SimResult) -> Result<Vec<f64>, SimError> {
    let g = &r.config.p_grid;
    if g.len() < 2 {
        return Err(SimError::TooFewPoints);
    }
    let (p1, p2) = (g[g.len() - 2], g[g.len() - 1]);
    let rate = |p: f64, k: usize| {
        r.users
            .iter()
            .find(|u| u.p == p && u.user == k + 1)
            .map(|u| u.mean_rate)
            .expect("grid point simulated")
    };
    let dh = 0.5 * (p2.ln() - p1.ln());
    Ok((0..3).map(|k| (rate(p2, k) - rate(p1, k)) / dh).collect())
}

/// Least-squares trend of one layer's gap against `log10 P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTrend {
    pub receiver: usize,
    pub layer: Layer,
    pub slope: f64,
    pub first: f64,
    pub last: f64,
    pub non_increasing: bool,
}

const TREND_TOL: f64 = 1e-9;

pub fn gap_trends(r: &SimResult) -> Vec<GapTrend> {
    let mut out = Vec::new();
    for k in 0..3 {
        for &l in decoding_order(k) {
            let pts: Vec<(f64, f64)> = r
                .layers
                .iter()
                .filter(|s| s.receiver == k + 1 && s.layer == l)
                .map(|s| (s.p.log10(), s.gap))
                .collect();
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
            let (first, last) = (pts[0].1, pts[pts.len() - 1].1);
            out.push(GapTrend {
                receiver: k + 1,
                layer: l,
                slope,
                first,
                last,
                non_increasing: slope <= TREND_TOL && last <= first + TREND_TOL,
            });
        }
    }
    out
}

/// Machine-readable digest of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub variant: Variant,
    pub trials: usize,
    pub seed: u64,
    pub slopes: Vec<f64>,
    pub design_gdof: Vec<f64>,
    pub gap_trends: Vec<GapTrend>,
}

pub fn summarize(r: &SimResult) -> Result<SimSummary, SimError> {
    let last = *r.config.p_grid.last().ok_or(SimError::TooFewPoints)?;
    Ok(SimSummary {
        variant: r.variant,
        trials: r.config.trials,
        seed: r.config.seed,
        slopes: slope_estimate(r)?,
        design_gdof: r.users.iter().filter(|u| u.p == last).map(|u| u.design_gdof).collect(),
        gap_trends: gap_trends(r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, parse_rational};
    use crate::sls::{RateSplit, SlsParams, VertexSolver};
    use crate::ChannelMatrix;
    use proptest::prelude::*;

    fn sample() -> ChannelMatrix {
        ChannelMatrix::from_ratios(&[
            &[(6, 5), (11, 10), (9, 10)],
            &[(9, 10), (13, 10), (7, 10)],
            &[(7, 10), (9, 10), (1, 1)],
        ])
        .unwrap()
    }

    fn r(s: &str) -> crate::Rational {
        parse_rational(s).unwrap()
    }

    /// Certified scheme for the vertex (1.2, 0.2, 0.1) of the example channel.
    fn corner() -> SlsScheme {
        let solver = VertexSolver::new(&sample()).unwrap();
        let cert = solver.certify(&[r("1.2"), r("0.2"), r("0.1")]).unwrap().unwrap();
        assert!(cert.ok());
        solver.scheme(&cert)
    }

    #[test]
    fn corner_converges() {
        let s = corner();
        let res = simulate_scheme(&s, &SimConfig::default()).unwrap();
        let slopes = slope_estimate(&res).unwrap();
        for (got, want) in slopes.iter().zip([1.2, 0.2, 0.1]) {
            assert!((got - want).abs() <= 0.1, "slopes {slopes:?}");
        }
        for st in res.layers.iter().filter(|s| s.p == 1e8) {
            assert!(st.gap <= 0.15, "{st:?}");
        }
    }

    #[test]
    fn corner_gaps_shrink_eventually() {
        let s = corner();
        let cfg = SimConfig {
            p_grid: vec![1e4, 1e8, 1e14, 1e20],
            ..SimConfig::default()
        };
        let res = simulate_scheme(&s, &cfg).unwrap();
        let trends = gap_trends(&res);
        for t in &trends {
            assert!(t.last <= t.first, "{t:?}");
        }
        let x1 = trends.iter().find(|t| t.receiver == 1 && t.layer == Layer::X1).unwrap();
        let at = |p: f64| res.layers.iter().find(|l| l.p == p && l.receiver == 1 && l.layer == Layer::X1).unwrap().gap;
        assert!(at(1e8) > at(1e4), "tight 0.1 layer first widens: {x1:?}");
        assert!(at(1e20) < at(1e8));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let s = corner();
        let cfg = SimConfig {
            trials: 20,
            ..SimConfig::default()
        };
        assert_eq!(simulate_scheme(&s, &cfg).unwrap(), simulate_scheme(&s, &cfg).unwrap());
        let other = SimConfig { seed: 2, ..cfg.clone() };
        assert_ne!(simulate_scheme(&s, &cfg).unwrap(), simulate_scheme(&s, &other).unwrap());
    }

    #[test]
    fn zero_scheme() {
        let s = SlsScheme {
            variant: Variant::D,
            params: SlsParams::new(int(1), int(0), int(0), int(0)),
            split: RateSplit::zero(),
            channel: sample(),
        };
        let res = simulate_scheme(&s, &SimConfig { trials: 10, ..SimConfig::default() }).unwrap();
        assert!(res.users.iter().all(|u| u.mean_rate == 0.0));
        assert!(res.layers.iter().all(|l| l.mean_normalized_rate >= 0.0 && l.gap == 0.0));
        assert!(slope_estimate(&res).unwrap().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn infeasible_and_bad_config_rejected() {
        let mut s = corner();
        s.split.d_all = r("1.5");
        assert!(matches!(simulate_scheme(&s, &SimConfig::default()), Err(SimError::Infeasible(_))));
        let s = corner();
        for cfg in [
            SimConfig { trials: 0, ..SimConfig::default() },
            SimConfig { p_grid: vec![1e6, 1e4], ..SimConfig::default() },
            SimConfig { p_grid: vec![0.5], ..SimConfig::default() },
            SimConfig { fading: Fading::Uniform { lo: 1.0, hi: 1.0 }, ..SimConfig::default() },
        ] {
            assert!(matches!(simulate_scheme(&s, &cfg), Err(SimError::BadConfig(_))));
        }
        let one = SimConfig { p_grid: vec![1e6], trials: 2, ..SimConfig::default() };
        let res = simulate_scheme(&s, &one).unwrap();
        assert_eq!(slope_estimate(&res), Err(SimError::TooFewPoints));
    }

    fn std_dev(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }

    #[test]
    fn doubling_trials_shrinks_spread() {
        let s = corner();
        let spread = |trials: usize| {
            let est: Vec<f64> = (0..60u64)
                .map(|seed| {
                    let cfg = SimConfig {
                        p_grid: vec![1e2, 1e3],
                        trials,
                        seed: seed * 7919 + trials as u64,
                        ..SimConfig::default()
                    };
                    slope_estimate(&simulate_scheme(&s, &cfg).unwrap()).unwrap()[0]
                })
                .collect();
            std_dev(&est)
        };
        let ratio = spread(40) / spread(20);
        assert!((0.5..0.95).contains(&ratio), "ratio {ratio}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn silencing_a_layer_never_hurts(
            g in proptest::array::uniform3(proptest::array::uniform3(0.5f64..1.5)),
            logp in 2.0f64..10.0,
            drop in 0usize..5,
        ) {
            let st = setup(&corner());
            let p = 10f64.powf(logp);
            let silenced = Layer::ALL[drop];
            let full = capacities(&st, &g, p, &[]);
            let less = capacities(&st, &g, p, &[silenced]);
            for k in 0..3 {
                for (pos, &l) in decoding_order(k).iter().enumerate() {
                    if l != silenced {
                        prop_assert!(less[k][pos] >= full[k][pos] - 1e-12);
                    }
                    prop_assert!(full[k][pos] >= 0.0);
                }
            }
        }
    }
}
