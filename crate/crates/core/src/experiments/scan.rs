//! Decay profiles, χ-scans and scaling fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decay::{decay_snapshot, optimal_time, precision_profile, qfi_decay};
use crate::error::{Error, Result};
use crate::estimation::{
    cramer_rao, delta_chi_pure_kerr, error_propagation, steady_state_gaussian_qfi, EstimationBudget,
};
use crate::fock::{number_superposition_state, DensityMatrix, FockSpace};
use crate::liouvillian::{build_liouvillian, evolve, ModelParams, Variant};
use crate::moments::MomentEngine;

use super::config::{EngineKind, FitRegime, ScanConfig};
use super::output::ScanRecord;

/// Largest elementwise deviation allowed between decay snapshots and ODE evolution.
pub const DECAY_ORACLE_TOL: f64 = 1e-8;
/// Relative δχ deviation allowed between homodyne and its oracle.
pub const HOMODYNE_ORACLE_TOL: f64 = 1e-4;
/// Relative δχ deviation allowed between the Gaussian engine and its oracle.
pub const GAUSSIAN_ORACLE_TOL: f64 = 1e-2;
/// Largest N accepted by the decay oracle check.
pub const DECAY_ORACLE_MAX_N: usize = 16;
/// ODE tolerance used by oracle checks.
pub const ORACLE_ODE_TOL: f64 = 1e-11;

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    b.build().map_err(|e| Error::Config(format!("worker pool: {e}")))
}

fn decay_params(cfg: &ScanConfig, gamma: f64) -> ModelParams {
    ModelParams {
        omega_c: cfg.omega_c,
        chi: cfg.chi[0],
        gamma,
        ..Default::default()
    }
}

/// Log grid from 1e−2/(Nγ) to 10/(Nγ).
pub fn auto_time_grid(n: usize, gamma: f64) -> Vec<f64> {
    let scale = 1.0 / (n as f64 * gamma);
    let (a, b, m) = ((1e-2 * scale).ln(), (10.0 * scale).ln(), 121);
    (0..m).map(|i| (a + (b - a) * i as f64 / (m - 1) as f64).exp()).collect()
}

/// Max |ρ_decay − ρ_ODE| over the given (sorted) times.
pub fn decay_oracle_deviation(n: usize, params: &ModelParams, times: &[f64]) -> Result<Vec<f64>> {
    if n > DECAY_ORACLE_MAX_N {
        return Err(Error::Config(format!("oracle check needs N <= {DECAY_ORACLE_MAX_N}")));
    }
    let dim = 2 * n + 2;
    let space = FockSpace::new(dim)?;
    let l = build_liouvillian(params, Variant::LabKerr, space);
    let mut rho = number_superposition_state(n, space)?.to_density();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t < now {
            return Err(Error::Config("oracle check needs increasing times".into()));
        }
        if t > now {
            rho = evolve(&rho, &l, t - now, ORACLE_ODE_TOL)?;
            now = t;
        }
        let snap = decay_snapshot(n, params, t)?.to_dense();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let exact = if i < snap.nrows() && j < snap.ncols() { snap[(i, j)] } else { Default::default() };
                worst = worst.max((rho.get(i, j) - exact).norm());
            }
        }
        out.push(worst);
    }
    Ok(out)
}

/// 1/δχ(t) table for every (N, γ); rows at t_op and 1/(4Nγ) are marked.
pub fn run_decay_profile(cfg: &ScanConfig) -> Result<Vec<ScanRecord>> {
    let mut records = Vec::new();
    for &gamma in &cfg.gamma {
        for &n in &cfg.n {
            let params = decay_params(cfg, gamma);
            let t_op = optimal_time(n, gamma, cfg.total_time)?;
            let quarter = 1.0 / (4.0 * n as f64 * gamma);
            let mut times: Vec<(f64, Option<&str>)> = if cfg.t.is_empty() {
                auto_time_grid(n, gamma)
            } else {
                cfg.t.clone()
            }
            .into_iter()
            .map(|t| (t, None))
            .collect();
            times.push((t_op, Some("t_op")));
            times.push((quarter, Some("quarter")));
            times.sort_by(|a, b| a.0.total_cmp(&b.0));
            let deviations = if cfg.oracle_check {
                Some(decay_oracle_deviation(
                    n,
                    &params,
                    &times.iter().map(|x| x.0).collect::<Vec<_>>(),
                )?)
            } else {
                None
            };
            for (k, &(t, marker)) in times.iter().enumerate() {
                let mut r = ScanRecord::new(records.len(), EngineKind::Decay, params);
                r.n = Some(n);
                r.t = Some(t);
                r.n_eff = n as f64;
                r.marker = marker.map(str::to_string);
                match (qfi_decay(n, gamma, t), precision_profile(n, gamma, cfg.total_time, t)) {
                    (Ok(f), Ok(d)) => {
                        r.qfi = Some(f);
                        r.delta_chi = d;
                    }
                    (Err(e), _) | (_, Err(e)) => r.status = format!("failed: {e}"),
                }
                if let Some(dev) = &deviations {
                    r.oracle_deviation = Some(dev[k]);
                    if dev[k] > DECAY_ORACLE_TOL && r.is_ok() {
                        r.status = "oracle_mismatch".into();
                    }
                }
                records.push(r);
            }
        }
    }
    Ok(records)
}

fn oracle_engine(cfg: &ScanConfig) -> MomentEngine {
    MomentEngine::Oracle { dim: cfg.oracle_dim }
}

fn rel_dev(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() {
        0.0
    } else {
        (a / b - 1.0).abs()
    }
}

fn evaluate_point(cfg: &ScanConfig, engine: EngineKind, params: &ModelParams, rec: &mut ScanRecord) -> Result<()> {
    let budget = cfg.steady_budget(params.gamma)?;
    let analytic = MomentEngine::Auto;
    let moments = match engine {
        EngineKind::Oracle => oracle_engine(cfg),
        _ => analytic,
    };
    rec.n_eff = moments.table(params)?.photon_number();
    match engine {
        EngineKind::HomodyneP | EngineKind::Oracle => {
            rec.observable = Some(cfg.observable.to_string());
            let ep = error_propagation(params, &moments, cfg.observable, &budget, None)?;
            rec.delta_chi = ep.delta_chi;
            if !ep.richardson_ok() {
                rec.status = "unconverged_derivative".into();
            }
            if cfg.oracle_check && engine == EngineKind::HomodyneP {
                let o = error_propagation(params, &oracle_engine(cfg), cfg.observable, &budget, None)?;
                let dev = rel_dev(ep.delta_chi, o.delta_chi);
                rec.oracle_deviation = Some(dev);
                if dev > HOMODYNE_ORACLE_TOL {
                    rec.status = "oracle_mismatch".into();
                }
            }
        }
        EngineKind::Gaussian => {
            let f = steady_state_gaussian_qfi(&analytic, params, None)?;
            rec.qfi = Some(f);
            rec.delta_chi = cramer_rao(f, &budget)?;
            if cfg.oracle_check {
                let fo = steady_state_gaussian_qfi(&oracle_engine(cfg), params, None)?;
                let dev = rel_dev(f, fo);
                rec.oracle_deviation = Some(dev);
                if dev > GAUSSIAN_ORACLE_TOL {
                    rec.status = "oracle_mismatch".into();
                }
            }
        }
        EngineKind::Decay => unreachable!("rejected before the scan"),
    }
    Ok(())
}

/// Anchors c/N^{3/2} and c/√N to δχ at the smallest χ of each series.
fn attach_reference_curves(records: &mut [ScanRecord]) {
    let key = |r: &ScanRecord| {
        let p = r.params;
        format!(
            "{}|{:?}|{:e}|{:e}|{:e}|{:e}|{:e}",
            r.engine, r.observable, p.kappa, p.omega_drive, p.lambda_drive, p.gamma, p.delta
        )
    };
    let mut anchors: std::collections::BTreeMap<String, (f64, f64, f64)> = Default::default();
    for r in records.iter() {
        if !(r.is_ok() && r.delta_chi.is_finite() && r.n_eff > 0.0) {
            continue;
        }
        let chi = r.params.chi.abs();
        let e = anchors.entry(key(r)).or_insert((f64::INFINITY, 0.0, 0.0));
        if chi < e.0 {
            *e = (chi, r.delta_chi, r.n_eff);
        }
    }
    for r in records.iter_mut() {
        if let Some(&(_, d0, n0)) = anchors.get(&key(r)) {
            if r.n_eff > 0.0 {
                r.ref_super_heisenberg = Some(d0 * (n0 / r.n_eff).powf(1.5));
                r.ref_standard = Some(d0 * (n0 / r.n_eff).sqrt());
            }
        }
    }
}

/// δχ(χ) for every grid point and engine, ordered by grid index.
pub fn run_chi_scan(cfg: &ScanConfig) -> Result<Vec<ScanRecord>> {
    if cfg.engines.contains(&EngineKind::Decay) {
        return Err(Error::Config("the decay engine belongs to decay-profile".into()));
    }
    let mut jobs = Vec::new();
    for base in cfg.base_points() {
        for &engine in &cfg.engines {
            for &chi in &cfg.chi {
                jobs.push((engine, base.with_chi(chi)));
            }
        }
    }
    let pool = pool(cfg.workers)?;
    let mut records: Vec<ScanRecord> = pool.install(|| {
        jobs.par_iter()
            .enumerate()
            .map(|(index, (engine, params))| {
                let mut rec = ScanRecord::new(index, *engine, *params);
                if let Err(e) = evaluate_point(cfg, *engine, params, &mut rec) {
                    rec.status = format!("failed: {e}");
                }
                rec
            })
            .collect()
    });
    attach_reference_curves(&mut records);
    Ok(records)
}

/// Least-squares slope of log δχ against log N_eff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub regime: FitRegime,
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
    pub span_decades: f64,
}

pub const FIT_MIN_POINTS: usize = 4;
pub const FIT_MIN_SPAN_DECADES: f64 = 1.0;

/// Fits log y = a + s log x; needs ≥ 4 points spanning ≥ one decade in x.
pub fn fit_log_log(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let span = if pts.is_empty() {
        0.0
    } else {
        let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    if pts.len() < FIT_MIN_POINTS || span < FIT_MIN_SPAN_DECADES {
        return Err(Error::InsufficientSpan {
            points: pts.len(),
            span,
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = if pts.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok((slope, stderr, intercept))
}

/// Scaling records for the configured regime and the fitted exponent.
pub fn run_scaling_fit(cfg: &ScanConfig) -> Result<(Vec<ScanRecord>, FitResult)> {
    let gamma = cfg.gamma[0];
    let mut records: Vec<ScanRecord> = match cfg.fit {
        FitRegime::PureKerr => {
            let t = cfg.t.first().copied().unwrap_or(1.0);
            cfg.n
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    let mut r = ScanRecord::new(i, EngineKind::Decay, ModelParams::default());
                    r.n = Some(n);
                    r.t = Some(t);
                    r.n_eff = n as f64;
                    r.delta_chi = delta_chi_pure_kerr(n, cfg.total_time, t);
                    r.qfi = Some(crate::decay::phase_derivative(n, t).powi(2));
                    r
                })
                .collect()
        }
        FitRegime::DecayOptimal => {
            let params = decay_params(cfg, gamma);
            let pool = pool(cfg.workers)?;
            pool.install(|| {
                cfg.n
                    .par_iter()
                    .enumerate()
                    .map(|(i, &n)| {
                        let mut r = ScanRecord::new(i, EngineKind::Decay, params);
                        r.n = Some(n);
                        r.n_eff = n as f64;
                        r.marker = Some("t_op".into());
                        let res = optimal_time(n, gamma, cfg.total_time).and_then(|t| {
                            r.t = Some(t);
                            r.qfi = Some(qfi_decay(n, gamma, t)?);
                            precision_profile(n, gamma, cfg.total_time, t)
                        });
                        match res {
                            Ok(d) => r.delta_chi = d,
                            Err(e) => r.status = format!("failed: {e}"),
                        }
                        r
                    })
                    .collect()
            })
        }
        FitRegime::OnePhoton | FitRegime::TwoPhoton => {
            let mut sub = cfg.clone();
            sub.engines = vec![cfg.engines[0]];
            if sub.engines[0] == EngineKind::Decay {
                return Err(Error::Config("steady-state fits need a steady-state engine".into()));
            }
            if cfg.fit == FitRegime::OnePhoton {
                sub.lambda = vec![0.0];
                sub.kappa = vec![0.0];
                sub.chi = vec![cfg.chi[0]];
            } else {
                sub.omega = vec![0.0];
                sub.lambda = vec![cfg.lambda[0]];
                sub.kappa = vec![0.0];
                sub.omega = vec![0.0];
            }
            sub.gamma = vec![gamma];
            sub.delta = vec![cfg.delta[0]];
            run_chi_scan(&sub)?
        }
    };
    let ok: Vec<&ScanRecord> = records.iter().filter(|r| r.is_ok()).collect();
    let xs: Vec<f64> = ok.iter().map(|r| r.n_eff).collect();
    let ys: Vec<f64> = ok.iter().map(|r| r.delta_chi).collect();
    let (slope, stderr, intercept) = fit_log_log(&xs, &ys)?;
    let finite: Vec<f64> = xs.iter().copied().filter(|x| *x > 0.0).collect();
    let span = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max).log10()
        - finite.iter().copied().fold(f64::INFINITY, f64::min).log10();
    for (i, r) in records.iter_mut().enumerate() {
        r.index = i;
    }
    Ok((
        records,
        FitResult {
            regime: cfg.fit,
            slope,
            stderr,
            intercept,
            points: xs.len(),
            span_decades: span,
        },
    ))
}

/// Budget used by the steady-state records of `cfg`.
pub fn budget_for(cfg: &ScanConfig, gamma: f64) -> Result<EstimationBudget> {
    cfg.steady_budget(gamma)
}

/// Evolves the decaying superposition on a Fock space of dimension 2N + 2.
pub fn evolve_superposition(n: usize, params: &ModelParams, t: f64) -> Result<DensityMatrix> {
    let space = FockSpace::new(2 * n + 2)?;
    let rho0 = number_superposition_state(n, space)?.to_density();
    evolve(&rho0, &build_liouvillian(params, Variant::LabKerr, space), t, ORACLE_ODE_TOL)
}
