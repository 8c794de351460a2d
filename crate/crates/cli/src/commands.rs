//! One function per subcommand.

use atomdiode::correlations::{integrated_emission, emission_profile, output_fields, Correlator, Direction};
use atomdiode::diode::{efficiency_from, efficiency_map, scattering, transmittance_curve};
use atomdiode::flapper::{empirical_correlators, sample_many};
use atomdiode::liouville::{concurrence, steady_state_with, tangle, SteadyState, SteadyStateOptions};
use atomdiode::slh::build_cascade;
use atomdiode::{ComplexMatrix, DensityMatrix, GridSpec, Liouvillian, Propagator, RateModel, Regime, C64};
use serde_json::{json, Value};

use crate::config::{complex_json, Command, RunConfig};
use crate::output::{num, Cell, Report, Table};
use crate::CliError;

const FULL: &str = "full-numeric";

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        Command::Steady => steady(cfg),
        Command::Scatter => scatter(cfg),
        Command::SweepPower => sweep_power(cfg),
        Command::SweepEfficiency => sweep_efficiency(cfg),
        Command::Correlate => correlate(cfg),
        Command::Emission => emission(cfg),
        Command::FlapCompare => flap_compare(cfg),
    }
}

fn solve(cfg: &RunConfig, l: &Liouvillian) -> Result<SteadyState, CliError> {
    let opts = SteadyStateOptions { null_tol: cfg.null_tol, horizon: cfg.horizon };
    Ok(steady_state_with(l, &DensityMatrix::symmetric(cfg.initial), opts)?)
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    let part = |f: fn(C64) -> f64| -> Value {
        (0..m.rows()).map(|i| (0..m.cols()).map(|j| num(f(m[(i, j)]))).collect::<Vec<_>>()).collect()
    };
    json!({ "re": part(|z| z.re), "im": part(|z| z.im) })
}

fn optimal_delta(cfg: &RunConfig, what: &str) -> Result<f64, CliError> {
    cfg.params.optimal_delta().ok_or_else(|| {
        CliError::config(format!(
            "{what} needs the optimal slice (gamma1 = gamma2 = 1, domega2 = 0, dphi = domega1); set `delta`"
        ))
    })
}

fn steady(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = &cfg.params;
    let triple = build_cascade(p)?;
    let ss = solve(cfg, &Liouvillian::assemble(&triple)?)?;
    let f = output_fields(&triple, &ss.rho)?;
    let pops = ss.rho.symmetric_populations()?;
    let rho = ss.rho.matrix();
    let mut table = Table::new(&["row", "col", "re", "im"]);
    for j in 0..4 {
        for i in 0..4 {
            table.push(vec![i.into(), j.into(), rho[(i, j)].re.into(), rho[(i, j)].im.into()]);
        }
    }
    let result = json!({
        "basis": ["gg", "ge", "eg", "ee"],
        "rho": matrix_json(rho),
        "populations": { "G": pops[0], "D": pops[1], "B": pops[2], "E": pops[3] },
        "degenerate": ss.degenerate,
        "null_dim": ss.null_dim,
        "residual": num(ss.residual),
        "concurrence": num(concurrence(&ss.rho)?),
        "tangle": num(tangle(&ss.rho)?),
        "outputs": {
            "amp_left": complex_json(f.amp_left),
            "amp_right": complex_json(f.amp_right),
            "flux_left": f.flux_left,
            "flux_right": f.flux_right,
        },
    });
    Ok(Report { regime: FULL, result, table })
}

fn scatter(cfg: &RunConfig) -> Result<Report, CliError> {
    let regime = if cfg.regime == "adiabatic" { Regime::Adiabatic } else { Regime::FullNumeric };
    let m = scattering(&cfg.params, regime)?;
    let mut table = Table::new(&["output", "input", "s_re", "s_im", "t"]);
    for (i, out) in ["left", "right"].into_iter().enumerate() {
        for (j, inp) in ["alpha", "beta"].into_iter().enumerate() {
            table.push(vec![out.into(), inp.into(), m.s[i][j].re.into(), m.s[i][j].im.into(), m.t[i][j].into()]);
        }
    }
    let s: Vec<Vec<Value>> = m.s.iter().map(|r| r.iter().map(|&z| complex_json(z)).collect()).collect();
    let result = json!({
        "rows": ["left-moving output", "right-moving output"],
        "columns": ["alpha (left input)", "beta (right input)"],
        "s": s,
        "t": m.t,
        "t_alpha": m.t_alpha(),
        "t_beta": m.t_beta(),
        "efficiency": efficiency_from(m.t_alpha(), m.t_beta()).ok().map(num),
    });
    Ok(Report { regime: regime.as_str(), result, table })
}

fn sweep_power(cfg: &RunConfig) -> Result<Report, CliError> {
    let delta = optimal_delta(cfg, "sweep-power")?;
    let powers = cfg.power.values()?;
    let curve = transmittance_curve(delta, &powers)?;
    let mut table = Table::new(&["power[gamma]", "t_alpha", "r_alpha", "t_beta", "r_beta", "efficiency"]);
    for x in &curve {
        table.push(vec![x.power.into(), x.t_alpha.into(), x.r_alpha.into(), x.t_beta.into(), x.r_beta.into(), x.efficiency.into()]);
    }
    let col = |f: fn(&atomdiode::diode::TransmittancePoint) -> f64| curve.iter().map(|x| num(f(x))).collect::<Vec<_>>();
    let result = json!({
        "delta": delta,
        "power": col(|x| x.power),
        "t_alpha": col(|x| x.t_alpha),
        "r_alpha": col(|x| x.r_alpha),
        "t_beta": col(|x| x.t_beta),
        "r_beta": col(|x| x.r_beta),
        "efficiency": col(|x| x.efficiency),
    });
    Ok(Report { regime: FULL, result, table })
}

fn sweep_efficiency(cfg: &RunConfig) -> Result<Report, CliError> {
    let alpha = cfg.params.alpha.norm();
    if alpha == 0.0 {
        return Err(CliError::config("sweep-efficiency needs a nonzero `alpha` (both sides are driven with |alpha|)"));
    }
    let m = efficiency_map(cfg.dphi_range, cfg.domega1_range, alpha, cfg.resolution)?;
    let mut table = Table::new(&["dphi[rad]", "domega1[gamma]", "efficiency"]);
    for (i, &w) in m.domega1.iter().enumerate() {
        for (j, &ph) in m.dphi.iter().enumerate() {
            table.push(vec![ph.into(), w.into(), m.eff[i][j].into()]);
        }
    }
    let result = json!({
        "drive_amplitude": alpha,
        "domega2": 0.0,
        "dphi": m.dphi,
        "domega1": m.domega1,
        "efficiency": m.eff.iter().map(|r| r.iter().map(|&e| num(e)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "argmax": { "dphi": m.argmax.0, "domega1": m.argmax.1, "efficiency": num(m.argmax.2) },
        "ridge_max": { "diagonal": num(m.max_along(1.0)), "antidiagonal": num(m.max_along(-1.0)) },
    });
    Ok(Report { regime: FULL, result, table })
}

fn correlate(cfg: &RunConfig) -> Result<Report, CliError> {
    let triple = build_cascade(&cfg.params)?;
    let l = Liouvillian::assemble(&triple)?;
    let prop = Propagator::new(&l)?;
    let ss = solve(cfg, &l)?;
    let tau = match cfg.tau {
        Some(g) => g.values()?,
        None => {
            let rate = prop.slowest_rate().ok_or_else(|| CliError::config("no decaying mode; set the tau grid explicitly"))?;
            GridSpec::default_tau(rate, 60).values()?
        }
    };
    let left = Correlator::new(&prop, Direction::Left.operator(&triple), &ss.rho)?;
    let right = Correlator::new(&prop, Direction::Right.operator(&triple), &ss.rho)?;
    let mut table = Table::new(&[
        "tau[1/gamma]",
        "g1_left_re",
        "g1_left_im",
        "g2_left",
        "g1_right_re",
        "g1_right_im",
        "g2_right",
    ]);
    let mut series = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for &t in &tau {
        let (gl1, gl2, gr1, gr2) = (left.g1(t)?, left.g2(t)?, right.g1(t)?, right.g2(t)?);
        table.push(vec![t.into(), gl1.re.into(), gl1.im.into(), gl2.into(), gr1.re.into(), gr1.im.into(), gr2.into()]);
        series[0].push(complex_json(gl1));
        series[1].push(num(gl2));
        series[2].push(complex_json(gr1));
        series[3].push(num(gr2));
    }
    let [g1l, g2l, g1r, g2r] = series;
    let channel = |c: &Correlator, g1: Vec<Value>, g2: Vec<Value>| -> Result<Value, CliError> {
        Ok(json!({
            "flux": c.flux(),
            "amplitude": complex_json(c.amplitude()),
            "g2_zero": num(c.g2(0.0)?),
            "g1_infinity": num(c.g1_infinity().re),
            "g1": g1,
            "g2": g2,
        }))
    };
    let result = json!({
        "tau": tau,
        "steady_state": { "degenerate": ss.degenerate, "null_dim": ss.null_dim },
        "left": channel(&left, g1l, g2l)?,
        "right": channel(&right, g1r, g2r)?,
    });
    Ok(Report { regime: FULL, result, table })
}

fn emission(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = &cfg.params;
    let grid = match cfg.time {
        Some(g) => g,
        None => {
            let end = match p.optimal_delta() {
                Some(d) if d != 0.0 => 20.0 / (d * d),
                _ => 100.0,
            };
            GridSpec::linear(0.0, end, 200)
        }
    };
    let times = grid.values()?;
    let rho0 = DensityMatrix::symmetric(cfg.initial);
    let profile = emission_profile(p, &rho0, &times)?;
    let energy = integrated_emission(p, &rho0, grid.max)?;
    let mut table = Table::new(&["time[1/gamma]", "flux_left[gamma]", "flux_right[gamma]"]);
    for (t, f) in times.iter().zip(&profile) {
        table.push(vec![(*t).into(), f.flux_left.into(), f.flux_right.into()]);
    }
    let result = json!({
        "time": times,
        "flux_left": profile.iter().map(|f| num(f.flux_left)).collect::<Vec<_>>(),
        "flux_right": profile.iter().map(|f| num(f.flux_right)).collect::<Vec<_>>(),
        "energy": {
            "until": grid.max,
            "left": energy.left,
            "right": energy.right,
            "total": energy.total(),
            "left_fraction": num(energy.left_fraction()),
        },
    });
    Ok(Report { regime: FULL, result, table })
}

fn flap_compare(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = &cfg.params;
    let delta = optimal_delta(cfg, "flap-compare")?;
    if p.alpha.im != 0.0 || !(p.alpha.re > 0.0) || p.beta.norm() != 0.0 {
        return Err(CliError::config("flap-compare needs a real positive `alpha` and `beta = 0`"));
    }
    let alpha = p.alpha.re;
    let model = if cfg.exact_rates { RateModel::from_diode_exact(delta, alpha)? } else { RateModel::from_diode(delta)? };
    let tau_grid = cfg.tau.unwrap_or_else(|| GridSpec::linear(0.0, 3.0 / model.gamma_tot(), 16));
    let tau = tau_grid.values()?;
    let tau_max = tau_grid.max;
    let t_max = cfg.t_max.unwrap_or_else(|| (50.0 / model.gamma_tot()).max(10.0 * tau_max));
    if t_max <= tau_max {
        return Err(CliError::config("`t_max` must exceed the largest tau"));
    }

    let analytic = model.analytic_correlators(p.alpha, &tau)?;
    let trajs = sample_many(&model, t_max, cfg.seed, cfg.trajectories)?;
    let mc = empirical_correlators(&trajs, &model, &tau)?;

    let triple = build_cascade(p)?;
    let l = Liouvillian::assemble(&triple)?;
    let prop = Propagator::new(&l)?;
    let ss = solve(cfg, &l)?;
    let refl = Correlator::new(&prop, Direction::Left.operator(&triple), &ss.rho)?;
    let trans = Correlator::new(&prop, Direction::Right.operator(&triple), &ss.rho)?;
    let full_ref: Vec<f64> = tau.iter().map(|&t| refl.g2(t)).collect::<Result<_, _>>()?;
    let full_trans: Vec<f64> = tau.iter().map(|&t| trans.g2(t)).collect::<Result<_, _>>()?;

    let mut table = Table::new(&[
        "tau[1/gamma]",
        "g2_ref_analytic",
        "g2_ref_mc",
        "g2_ref_mc_stderr",
        "g2_ref_full",
        "g2_trans_analytic",
        "g2_trans_mc",
        "g2_trans_mc_stderr",
        "g2_trans_full",
    ]);
    for k in 0..tau.len() {
        table.push(vec![
            Cell::Real(tau[k]),
            analytic.g2_ref[k].into(),
            mc.g2_ref[k].mean.into(),
            mc.g2_ref[k].stderr.into(),
            full_ref[k].into(),
            analytic.g2_trans[k].into(),
            mc.g2_trans[k].mean.into(),
            mc.g2_trans[k].stderr.into(),
            full_trans[k].into(),
        ]);
    }
    let nums = |v: &[f64]| v.iter().map(|&x| num(x)).collect::<Vec<_>>();
    let result = json!({
        "delta": delta,
        "alpha": alpha,
        "rates": {
            "gamma01": model.gamma01,
            "gamma10": model.gamma10,
            "gamma_tot": model.gamma_tot(),
            "p0": model.p0(),
            "p1": model.p1(),
            "exact": cfg.exact_rates,
        },
        "monte_carlo": {
            "trajectories": trajs.len(),
            "t_max": t_max,
            "dwell_events": mc.dwell_events,
            "blocks": mc.blocks,
        },
        "tau": tau,
        "g2_ref": {
            "analytic": nums(&analytic.g2_ref),
            "mc": mc.g2_ref.iter().map(|e| num(e.mean)).collect::<Vec<_>>(),
            "mc_stderr": mc.g2_ref.iter().map(|e| num(e.stderr)).collect::<Vec<_>>(),
            "full": nums(&full_ref),
        },
        "g2_trans": {
            "analytic": nums(&analytic.g2_trans),
            "mc": mc.g2_trans.iter().map(|e| num(e.mean)).collect::<Vec<_>>(),
            "mc_stderr": mc.g2_trans.iter().map(|e| num(e.stderr)).collect::<Vec<_>>(),
            "full": nums(&full_trans),
        },
    });
    Ok(Report { regime: "full-numeric+flapper", result, table })
}
