//! Two-state flapping-mirror model of the atoms.
//!
//! State 0 (the dark state) is transparent, state 1 (the ground state)
//! reflects. The mirror switches between them as a continuous-time Markov
//! chain with rates `gamma01` (0 → 1) and `gamma10` (1 → 0).

use std::fmt;
use std::io::{BufRead, Write};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Minimum number of independent trajectories for per-trajectory error bars.
pub const MIN_TRAJECTORIES: usize = 100;
/// Minimum coverage of a single long trajectory, in units of `1/gamma_tot`.
pub const MIN_COVERAGE: f64 = 1e3;
/// Number of time blocks a long trajectory is cut into for error bars.
pub const LONG_RUN_BLOCKS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mirror {
    Transparent = 0,
    Reflective = 1,
}

impl Mirror {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(Mirror::Transparent),
            1 => Some(Mirror::Reflective),
            _ => None,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Mirror::Transparent => Mirror::Reflective,
            Mirror::Reflective => Mirror::Transparent,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateModel {
    /// Rate from the transparent to the reflective state.
    pub gamma01: f64,
    /// Rate from the reflective to the transparent state.
    pub gamma10: f64,
}

impl RateModel {
    pub fn new(gamma01: f64, gamma10: f64) -> Result<Self> {
        for (name, g) in [("gamma01", gamma01), ("gamma10", gamma10)] {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite, got {g}")));
            }
        }
        Ok(Self { gamma01, gamma10 })
    }

    /// Rates of the detuned diode on its optimal slice in the strong-drive
    /// limit: `gamma01 = δ²`, `gamma10 = 2δ²`.
    pub fn from_diode(delta: f64) -> Result<Self> {
        if delta == 0.0 {
            return Err(Error::InvalidParams("delta = 0 freezes the mirror".into()));
        }
        let d2 = delta * delta;
        Self::new(d2, 2.0 * d2)
    }

    /// As [`RateModel::from_diode`] with the drive-dependent rate
    /// `gamma10 = 4α²δ²/(2α² + δ²)`.
    pub fn from_diode_exact(delta: f64, alpha: f64) -> Result<Self> {
        if delta == 0.0 {
            return Err(Error::InvalidParams("delta = 0 freezes the mirror".into()));
        }
        let (a2, d2) = (alpha * alpha, delta * delta);
        Self::new(d2, 4.0 * a2 * d2 / (2.0 * a2 + d2))
    }

    pub fn gamma_tot(&self) -> f64 {
        self.gamma01 + self.gamma10
    }

    pub fn p0(&self) -> f64 {
        self.gamma10 / self.gamma_tot()
    }

    pub fn p1(&self) -> f64 {
        self.gamma01 / self.gamma_tot()
    }

    pub fn stationary(&self, s: Mirror) -> f64 {
        match s {
            Mirror::Transparent => self.p0(),
            Mirror::Reflective => self.p1(),
        }
    }

    /// Rate of leaving state `s`.
    pub fn exit_rate(&self, s: Mirror) -> f64 {
        match s {
            Mirror::Transparent => self.gamma01,
            Mirror::Reflective => self.gamma10,
        }
    }

    /// Probability of being in `to` a time `tau` after being in `from`.
    /// Negative `tau` is read as `|tau|`; the stationary chain is reversible.
    pub fn transition_probability(&self, from: Mirror, to: Mirror, tau: f64) -> f64 {
        let decay = (-self.gamma_tot() * tau.abs()).exp();
        let p = self.stationary(to);
        if from == to {
            p + (1.0 - p) * decay
        } else {
            p * (1.0 - decay)
        }
    }

    /// `P_{R,R}(τ) = p_R + (1 − p_R)e^{−Γ_tot τ}`.
    pub fn return_probability(&self, r: Mirror, tau: f64) -> f64 {
        self.transition_probability(r, r, tau)
    }

    /// Rate-equation populations `[P_0, P_1]` at time `t`.
    pub fn evolve(&self, initial: [f64; 2], t: f64) -> [f64; 2] {
        let decay = (-self.gamma_tot() * t).exp();
        let total = initial[0] + initial[1];
        let p0 = self.p0() * total + (initial[0] - self.p0() * total) * decay;
        [p0, total - p0]
    }

    /// Output fields and correlators for a coherent drive `alpha_in` from the left.
    pub fn analytic_correlators(&self, alpha_in: C64, tau: &[f64]) -> Result<FlapperCorrelators> {
        if alpha_in.norm() == 0.0 {
            return Err(Error::InvalidParams("flapper correlators need a nonzero drive".into()));
        }
        let (p0, p1) = (self.p0(), self.p1());
        let p11: Vec<f64> = tau.iter().map(|&t| self.return_probability(Mirror::Reflective, t)).collect();
        let p00: Vec<f64> = tau.iter().map(|&t| self.return_probability(Mirror::Transparent, t)).collect();
        Ok(FlapperCorrelators {
            tau: tau.to_vec(),
            amp_reflected: alpha_in * p1,
            amp_transmitted: alpha_in * p0,
            flux_reflected: p1 * alpha_in.norm_sqr(),
            flux_transmitted: p0 * alpha_in.norm_sqr(),
            g2_ref: p11.iter().map(|x| x / p1).collect(),
            g2_trans: p00.iter().map(|x| x / p0).collect(),
            g1_ref: p11,
            g1_trans: p00,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlapperCorrelators {
    pub tau: Vec<f64>,
    pub amp_reflected: C64,
    pub amp_transmitted: C64,
    pub flux_reflected: f64,
    pub flux_transmitted: f64,
    pub g1_ref: Vec<f64>,
    pub g1_trans: Vec<f64>,
    pub g2_ref: Vec<f64>,
    pub g2_trans: Vec<f64>,
}

/// One realization of the switching process on `[0, t_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub initial_state: Mirror,
    /// Strictly increasing, all inside `(0, t_max)`.
    pub switch_times: Vec<f64>,
    pub t_max: f64,
}

/// SplitMix64 step; derives independent per-trajectory seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples a trajectory started from the stationary distribution.
pub fn sample(m: &RateModel, t_max: f64, seed: u64) -> Result<Trajectory> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParams(format!("t_max must be positive, got {t_max}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial_state = if rng.random::<f64>() < m.p0() { Mirror::Transparent } else { Mirror::Reflective };
    let exits = [
        Exp::new(m.gamma01).map_err(|e| Error::InvalidParams(e.to_string()))?,
        Exp::new(m.gamma10).map_err(|e| Error::InvalidParams(e.to_string()))?,
    ];
    let mut switch_times = Vec::new();
    let (mut t, mut s) = (0.0, initial_state);
    loop {
        let next = t + exits[s.index()].sample(&mut rng);
        if next >= t_max {
            break;
        }
        // Zero-length dwells would break strict ordering; redraw.
        if next <= t {
            continue;
        }
        switch_times.push(next);
        t = next;
        s = s.flip();
    }
    Ok(Trajectory { seed, initial_state, switch_times, t_max })
}

/// `n` trajectories with seeds `derive_seed(master, i)`, sampled in parallel.
pub fn sample_many(m: &RateModel, t_max: f64, master: u64, n: usize) -> Result<Vec<Trajectory>> {
    (0..n as u64).into_par_iter().map(|i| sample(m, t_max, derive_seed(master, i))).collect()
}

impl Trajectory {
    pub fn state_at(&self, t: f64) -> Mirror {
        let flips = self.switch_times.partition_point(|&x| x <= t);
        if flips % 2 == 0 {
            self.initial_state
        } else {
            self.initial_state.flip()
        }
    }

    /// `(start, end, state)` for every dwell, the last one cut at `t_max`.
    pub fn segments(&self) -> Vec<(f64, f64, Mirror)> {
        let mut out = Vec::with_capacity(self.switch_times.len() + 1);
        let (mut start, mut s) = (0.0, self.initial_state);
        for &t in &self.switch_times {
            out.push((start, t, s));
            start = t;
            s = s.flip();
        }
        out.push((start, self.t_max, s));
        out
    }

    /// Completed dwells in state `s`, excluding the censored first and last ones.
    pub fn dwell_times(&self, s: Mirror) -> Vec<f64> {
        let segs = self.segments();
        if segs.len() < 3 {
            return Vec::new();
        }
        segs[1..segs.len() - 1].iter().filter(|x| x.2 == s).map(|x| x.1 - x.0).collect()
    }

    /// Fraction of `[0, t_max]` spent in state `s`.
    pub fn occupation(&self, s: Mirror) -> f64 {
        self.segments().iter().filter(|x| x.2 == s).map(|x| x.1 - x.0).sum::<f64>() / self.t_max
    }

    fn intervals(&self, s: Mirror) -> Vec<(f64, f64)> {
        self.segments().into_iter().filter(|x| x.2 == s).map(|x| (x.0, x.1)).collect()
    }

    /// Writes `time[1/gamma],state` rows: one per state entry plus a final
    /// row at `t_max`. The seed goes in a leading comment line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# seed = {}", self.seed)?;
        writeln!(w, "time[1/gamma],state")?;
        writeln!(w, "{:.16e},{}", 0.0, self.initial_state.index())?;
        let mut s = self.initial_state;
        for &t in &self.switch_times {
            s = s.flip();
            writeln!(w, "{:.16e},{}", t, s.index())?;
        }
        writeln!(w, "{:.16e},{}", self.t_max, s.index())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::InvalidParams(format!("trajectory csv line {line}: {msg}"));
        let mut seed = None;
        let mut rows: Vec<(f64, usize)> = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line.map_err(|e| bad(n + 1, &e.to_string()))?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("seed =") {
                    seed = Some(v.trim().parse::<u64>().map_err(|e| bad(n + 1, &e.to_string()))?);
                }
                continue;
            }
            if line.is_empty() || line.starts_with("time") {
                continue;
            }
            let (t, s) = line.split_once(',').ok_or_else(|| bad(n + 1, "expected `time,state`"))?;
            let t: f64 = t.trim().parse().map_err(|_| bad(n + 1, "bad time"))?;
            let s: usize = s.trim().parse().map_err(|_| bad(n + 1, "bad state"))?;
            if s > 1 {
                return Err(bad(n + 1, "state must be 0 or 1"));
            }
            rows.push((t, s));
        }
        if rows.len() < 2 {
            return Err(Error::InvalidParams("trajectory csv needs at least two rows".into()));
        }
        let initial_state = Mirror::from_index(rows[0].1).unwrap();
        let t_max = rows[rows.len() - 1].0;
        let switch_times: Vec<f64> = rows[1..rows.len() - 1].iter().map(|r| r.0).collect();
        let mut prev = 0.0;
        for &t in &switch_times {
            if !(t > prev && t < t_max) {
                return Err(Error::InvalidParams("switch times must be strictly increasing".into()));
            }
            prev = t;
        }
        Ok(Self { seed: seed.unwrap_or(0), initial_state, switch_times, t_max })
    }
}

impl fmt::Display for Mirror {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn scaled(self, k: f64) -> Self {
        Self { mean: self.mean * k, stderr: self.stderr * k.abs() }
    }

    /// `|mean − x|` in units of the standard error.
    pub fn z_score(&self, x: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.mean == x { 0.0 } else { f64::INFINITY }
        } else {
            (self.mean - x).abs() / self.stderr
        }
    }
}

#[derive(Clone, Debug)]
pub struct EmpiricalCorrelators {
    pub tau: Vec<f64>,
    /// Return probabilities of the transparent and reflective states.
    pub p00: Vec<Estimate>,
    pub p11: Vec<Estimate>,
    pub g1_ref: Vec<Estimate>,
    pub g1_trans: Vec<Estimate>,
    pub g2_ref: Vec<Estimate>,
    pub g2_trans: Vec<Estimate>,
    /// Completed dwells across all trajectories.
    pub dwell_events: usize,
    /// Blocks used for the error bars.
    pub blocks: usize,
}

/// Time-averaged return probabilities with batch-means error bars.
///
/// With at least [`MIN_TRAJECTORIES`] trajectories each one is a block.
/// Otherwise the trajectories must together cover [`MIN_COVERAGE`]`/gamma_tot`
/// and are cut into [`LONG_RUN_BLOCKS`] time blocks.
pub fn empirical_correlators(trajs: &[Trajectory], m: &RateModel, tau: &[f64]) -> Result<EmpiricalCorrelators> {
    if trajs.is_empty() {
        return Err(Error::InsufficientData("no trajectories".into()));
    }
    if let Some(t) = tau.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidParams(format!("tau must be non-negative, got {t}")));
    }
    let tau_max = tau.iter().cloned().fold(0.0, f64::max);
    // Start times range over [0, window] so that every τ uses the same samples.
    let windows: Vec<f64> = trajs.iter().map(|t| t.t_max - tau_max).collect();
    if windows.iter().any(|&w| w <= 0.0) {
        return Err(Error::InsufficientData(format!("tau up to {tau_max} exceeds a trajectory length")));
    }
    let coverage = windows.iter().sum::<f64>() * m.gamma_tot();
    let per_traj = if trajs.len() >= MIN_TRAJECTORIES {
        1
    } else if coverage >= MIN_COVERAGE {
        LONG_RUN_BLOCKS.div_ceil(trajs.len())
    } else {
        return Err(Error::InsufficientData(format!(
            "{} trajectories covering {coverage:.3e}/gamma_tot; need {MIN_TRAJECTORIES} or {MIN_COVERAGE:e}",
            trajs.len()
        )));
    };

    let mut p = [Vec::with_capacity(tau.len()), Vec::with_capacity(tau.len())];
    for s in [Mirror::Transparent, Mirror::Reflective] {
        let base: Vec<Vec<(f64, f64)>> = trajs.iter().map(|t| t.intervals(s)).collect();
        let occ: Vec<Vec<f64>> = base.iter().zip(&windows).map(|(iv, &w)| block_measure(iv, w, per_traj)).collect();
        for &t in tau {
            if t == 0.0 {
                p[s.index()].push(Estimate { mean: 1.0, stderr: 0.0 });
                continue;
            }
            let mut num = Vec::with_capacity(trajs.len() * per_traj);
            let mut den = Vec::with_capacity(trajs.len() * per_traj);
            for ((iv, &w), o) in base.iter().zip(&windows).zip(&occ) {
                let shifted: Vec<(f64, f64)> = iv.iter().map(|&(a, b)| (a - t, b - t)).collect();
                num.extend(block_measure(&intersect(iv, &shifted), w, per_traj));
                den.extend_from_slice(o);
            }
            p[s.index()].push(ratio_estimate(&num, &den)?);
        }
    }
    let [p00, p11] = p;
    Ok(EmpiricalCorrelators {
        tau: tau.to_vec(),
        g1_ref: p11.clone(),
        g1_trans: p00.clone(),
        g2_ref: p11.iter().map(|e| e.scaled(1.0 / m.p1())).collect(),
        g2_trans: p00.iter().map(|e| e.scaled(1.0 / m.p0())).collect(),
        p00,
        p11,
        dwell_events: trajs.iter().map(|t| t.switch_times.len().saturating_sub(1)).sum(),
        blocks: trajs.len() * per_traj,
    })
}

/// Intersection of two sorted lists of disjoint intervals.
fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi > lo {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Measure of `intervals ∩ [0, window]` inside each of `blocks` equal blocks.
fn block_measure(intervals: &[(f64, f64)], window: f64, blocks: usize) -> Vec<f64> {
    let width = window / blocks as f64;
    let mut out = vec![0.0; blocks];
    for &(a, b) in intervals {
        let (a, b) = (a.max(0.0), b.min(window));
        if b <= a {
            continue;
        }
        let first = ((a / width) as usize).min(blocks - 1);
        let last = ((b / width) as usize).min(blocks - 1);
        for (k, slot) in out.iter_mut().enumerate().take(last + 1).skip(first) {
            let lo = a.max(k as f64 * width);
            let hi = b.min((k + 1) as f64 * width);
            if hi > lo {
                *slot += hi - lo;
            }
        }
    }
    out
}

/// Ratio estimator `Σnum/Σden` with its delta-method standard error.
fn ratio_estimate(num: &[f64], den: &[f64]) -> Result<Estimate> {
    let n = num.len();
    if n < 2 {
        return Err(Error::InsufficientData("need at least two blocks".into()));
    }
    let (sn, sd): (f64, f64) = (num.iter().sum(), den.iter().sum());
    if sd == 0.0 {
        return Err(Error::InsufficientData("state never visited".into()));
    }
    let r = sn / sd;
    let var: f64 = num.iter().zip(den).map(|(x, y)| (x - r * y).powi(2)).sum::<f64>() / (n as f64 * (n - 1) as f64);
    Ok(Estimate { mean: r, stderr: var.sqrt() / (sd / n as f64) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diode_rates() {
        let m = RateModel::from_diode(1e-3).unwrap();
        assert_abs_diff_eq!(m.gamma_tot(), 3e-6, epsilon = 1e-20);
        assert_abs_diff_eq!(m.p0(), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.p1(), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.p0() * m.gamma01, m.p1() * m.gamma10, epsilon = 1e-20);
        let m2 = RateModel::from_diode(2e-3).unwrap();
        assert_abs_diff_eq!(m2.gamma_tot() / m.gamma_tot(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m2.p0(), m.p0(), epsilon = 1e-15);
        assert!(RateModel::from_diode(0.0).is_err());
    }

    #[test]
    fn exact_rates_approach_limit() {
        let m = RateModel::from_diode_exact(1e-5, 1e-2).unwrap();
        assert_abs_diff_eq!(m.gamma10 / 2e-10, 1.0, epsilon = 1e-6);
        assert!(RateModel::from_diode_exact(1e-3, 0.0).is_err());
    }

    #[test]
    fn return_probability_values() {
        let m = RateModel::from_diode(1e-3).unwrap();
        assert_eq!(m.return_probability(Mirror::Reflective, 0.0), 1.0);
        assert_abs_diff_eq!(m.return_probability(Mirror::Reflective, 1e12), 1.0 / 3.0, epsilon = 1e-15);
        let half = std::f64::consts::LN_2 / m.gamma_tot();
        assert_abs_diff_eq!(m.return_probability(Mirror::Transparent, half), 5.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn analytic_correlators_values() {
        let m = RateModel::from_diode(1e-3).unwrap();
        let c = m.analytic_correlators(C64::new(0.1, 0.0), &[0.0, 1e12]).unwrap();
        assert_abs_diff_eq!(c.g2_ref[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.g2_trans[0], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.g2_ref[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.flux_reflected, 0.01 / 3.0, epsilon = 1e-16);
        assert_abs_diff_eq!(c.flux_transmitted, 0.02 / 3.0, epsilon = 1e-16);
        assert!(m.analytic_correlators(C64::new(0.0, 0.0), &[0.0]).is_err());
    }

    #[test]
    fn rate_equation_relaxes() {
        let m = RateModel::from_diode(1e-2).unwrap();
        let p = m.evolve([1.0, 0.0], 0.0);
        assert_eq!(p, [1.0, 0.0]);
        let p = m.evolve([1.0, 0.0], 1e9);
        assert_abs_diff_eq!(p[0], 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn sampling_is_reproducible() {
        let m = RateModel::from_diode(1e-2).unwrap();
        let a = sample(&m, 1e6, 7).unwrap();
        let b = sample(&m, 1e6, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample(&m, 1e6, 8).unwrap());
        assert!(a.switch_times.windows(2).all(|w| w[0] < w[1]));
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert!(sample(&m, 0.0, 1).is_err());
    }

    #[test]
    fn long_run_statistics() {
        let m = RateModel::from_diode(1e-2).unwrap();
        let t_max = 1e4 / m.gamma_tot();
        let tr = sample(&m, t_max, 11).unwrap();
        // Occupation error from roughly t_max·Γ_tot/2 independent blocks.
        let occ = tr.occupation(Mirror::Transparent);
        let sigma = (2.0 / 9.0 / (t_max * m.gamma_tot() / 2.0)).sqrt();
        assert!((occ - 2.0 / 3.0).abs() < 3.0 * sigma, "occupation {occ}");
        let dwells = tr.dwell_times(Mirror::Reflective);
        assert!(dwells.len() >= 1000);
        let mean = dwells.iter().sum::<f64>() / dwells.len() as f64;
        assert!((mean * m.gamma10 - 1.0).abs() < 0.05, "mean dwell {mean}");
    }

    #[test]
    fn state_lookup() {
        let t = Trajectory { seed: 0, initial_state: Mirror::Reflective, switch_times: vec![1.0, 2.5], t_max: 4.0 };
        assert_eq!(t.state_at(0.5), Mirror::Reflective);
        assert_eq!(t.state_at(1.0), Mirror::Transparent);
        assert_eq!(t.state_at(3.0), Mirror::Reflective);
        assert_abs_diff_eq!(t.occupation(Mirror::Transparent), 1.5 / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let m = RateModel::from_diode(1e-2).unwrap();
        let tr = sample(&m, 1e5, 3).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().nth(1).unwrap() == "time[1/gamma],state");
        assert_eq!(Trajectory::read_csv(&buf[..]).unwrap(), tr);
        assert!(Trajectory::read_csv("time,state\n0,0\n1,5\n".as_bytes()).is_err());
    }

    #[test]
    fn empirical_single_run() {
        let m = RateModel::from_diode(1e-2).unwrap();
        let trajs = vec![sample(&m, 2e3 / m.gamma_tot(), 5).unwrap()];
        let tau = [0.0, 1e3 / m.gamma_tot()];
        let e = empirical_correlators(&trajs, &m, &tau).unwrap();
        assert_eq!(e.p11[0].mean, 1.0);
        assert_eq!(e.p00[0].stderr, 0.0);
        assert_eq!(e.blocks, LONG_RUN_BLOCKS);
        assert!(e.p11[1].z_score(m.p1()) < 4.0);
    }

    #[test]
    fn error_bars_are_calibrated() {
        // Over many seeds the standardized error has mean ≈ 0 and rarely exceeds 3.
        let m = RateModel::from_diode(1e-2).unwrap();
        let tau = [0.1 / m.gamma_tot(), 1.0 / m.gamma_tot()];
        let n = 100;
        let (mut sum, mut outside, mut count) = (0.0, 0, 0);
        for seed in 0..n {
            let trajs = vec![sample(&m, 2e3 / m.gamma_tot(), derive_seed(99, seed)).unwrap()];
            let e = empirical_correlators(&trajs, &m, &tau).unwrap();
            for (k, &t) in tau.iter().enumerate() {
                for (est, r) in [(e.p00[k], Mirror::Transparent), (e.p11[k], Mirror::Reflective)] {
                    let z = (est.mean - m.return_probability(r, t)) / est.stderr;
                    sum += z;
                    outside += usize::from(z.abs() > 3.0);
                    count += 1;
                }
            }
        }
        let mean_z = sum / count as f64;
        assert!(mean_z.abs() < 0.3, "mean z {mean_z}");
        assert!(outside as f64 / (count as f64) < 0.03, "{outside} of {count} outside 3 SE");
    }

    #[test]
    fn insufficient_data() {
        let m = RateModel::from_diode(1e-2).unwrap();
        let short = vec![sample(&m, 10.0 / m.gamma_tot(), 1).unwrap()];
        assert!(matches!(empirical_correlators(&short, &m, &[0.0, 1.0]), Err(Error::InsufficientData(_))));
        assert!(matches!(empirical_correlators(&short, &m, &[1e12]), Err(Error::InsufficientData(_))));
        assert!(matches!(empirical_correlators(&[], &m, &[0.0]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn interval_helpers() {
        let a = [(0.0, 2.0), (3.0, 5.0)];
        let b = [(1.0, 4.0)];
        assert_eq!(intersect(&a, &b), vec![(1.0, 2.0), (3.0, 4.0)]);
        assert_eq!(block_measure(&a, 4.0, 2), vec![2.0, 1.0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn chapman_kolmogorov(delta in 1e-4..0.1f64, x1 in 0.0..5.0f64, x2 in 0.0..5.0f64, refl in any::<bool>()) {
                let m = RateModel::from_diode(delta).unwrap();
                let (t1, t2) = (x1 / m.gamma_tot(), x2 / m.gamma_tot());
                let r = if refl { Mirror::Reflective } else { Mirror::Transparent };
                let lhs = m.return_probability(r, t1 + t2);
                let p1 = m.return_probability(r, t1);
                let rhs = p1 * m.return_probability(r, t2) + (1.0 - p1) * m.transition_probability(r.flip(), r, t2);
                prop_assert!((lhs - rhs).abs() <= 1e-12);
            }

            #[test]
            fn rate_equation_conserves(delta in 1e-4..0.1f64, p in 0.0..1.0f64, x in 0.0..10.0f64) {
                let m = RateModel::from_diode(delta).unwrap();
                let q = m.evolve([p, 1.0 - p], x / m.gamma_tot());
                prop_assert!((q[0] + q[1] - 1.0).abs() < 1e-14);
                prop_assert!(q[0] >= p.min(m.p0()) - 1e-14 && q[0] <= p.max(m.p0()) + 1e-14);
            }
        }
    }
}
