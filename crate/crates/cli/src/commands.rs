use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fastfront::analysis::{track_level_set, LevelSetTrack, ResidualReport};
use fastfront::config::{ReactionChoice, RunConfig};
use fastfront::io::{field_from_table, field_table, profile_from_table, profile_table, ArtifactStore, Table};
use fastfront::pde::{Field, Grid, RunStats, SnapshotStats};
use fastfront::pipeline::{self, check_domain, compute_profile, CertificateReport, ProfileRun, Rate};
use fastfront::profile::verify_profile_estimates;
use fastfront::{classify_regime, Error};

use crate::{Cli, Command, Exit, RateArg};

struct Session {
    cfg: RunConfig,
    store: ArtifactStore,
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::from_path(&cli.config).with_context(|| format!("loading {}", cli.config.display()))?;
    let root = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone().into());
    let store = ArtifactStore::open(&root, &cfg.hash(), cfg.output.write_once)?;
    let mut s = Session { cfg, store };
    s.store.write_json("config", &s.cfg)?;
    s.store.save()?;
    match &cli.command {
        Command::Regime => regime(&mut s),
        Command::Profile { rate, verify_only } => {
            let rates: Vec<Rate> = match rate {
                RateArg::Lower => vec![Rate::Lower],
                RateArg::Reduced => vec![Rate::Reduced],
                RateArg::Upper => vec![Rate::Upper],
                RateArg::All => vec![Rate::Lower, Rate::Reduced, Rate::Upper],
            };
            if *verify_only {
                replay_profiles(&s, &rates)
            } else {
                profile(&mut s, &rates)
            }
        }
        Command::Simulate => simulate(&mut s).map(|_| ()),
        Command::Track => track(&mut s).map(|_| ()),
        Command::Verify => verify(&mut s),
        Command::Report => report(&s),
    }
}

fn regime(s: &mut Session) -> Result<()> {
    let rep = match classify_regime(&s.cfg.model) {
        Ok(r) => r,
        Err(Error::InvalidParams(msg)) => return Err(Exit(1, format!("parameters out of scope: {msg}")).into()),
        Err(e) => return Err(e.into()),
    };
    println!("{}", serde_json::to_string_pretty(&rep)?);
    println!(
        "in_scope = {}  sigma = {}  improved_upper = {}",
        rep.in_scope, rep.sigma, rep.improved_upper
    );
    s.store.write_json("regime", &rep)?;
    s.store.finish_stage("regime")?;
    if !rep.in_scope {
        return Err(Exit(1, format!("parameters out of scope: {}", rep.notes)).into());
    }
    Ok(())
}

fn profile_name(rate: Rate) -> String {
    format!("profile_{}", rate.name())
}

fn load_profile(store: &ArtifactStore, rate: Rate) -> Result<Option<ProfileRun>> {
    let name = profile_name(rate);
    if !(store.is_intact(&format!("{name}.csv")) && store.is_intact(&format!("{name}.json"))) {
        return Ok(None);
    }
    let (table, meta): (Table, ProfileRun) = store.read_table(&name)?;
    let solution = profile_from_table(&table, meta.solution.clone())?;
    Ok(Some(ProfileRun { solution, ..meta }))
}

fn store_profile(store: &mut ArtifactStore, rate: Rate, run: &ProfileRun) -> Result<()> {
    let (table, meta) = profile_table(&run.solution);
    store.write_table(&profile_name(rate), &table, &ProfileRun { solution: meta, ..run.clone() })?;
    Ok(())
}

/// Loads the stored profiles and computes the missing ones in parallel.
fn ensure_profiles(s: &mut Session, rates: &[Rate]) -> Result<Vec<ProfileRun>> {
    let mut out: Vec<Option<ProfileRun>> = rates.iter().map(|&r| load_profile(&s.store, r)).collect::<Result<_>>()?;
    let todo: Vec<usize> = (0..rates.len()).filter(|&i| out[i].is_none()).collect();
    let cfg = &s.cfg;
    let k = (cfg.scan.k_min, cfg.scan.k_max);
    let computed: Vec<(usize, fastfront::Result<ProfileRun>)> = todo
        .par_iter()
        .map(|&i| (i, compute_profile(&cfg.model, rates[i].value(&cfg.model), &cfg.shooting, k)))
        .collect();
    for (i, res) in computed {
        let run = res.with_context(|| format!("{} profile (r = {})", rates[i].name(), rates[i].value(&cfg.model)))?;
        store_profile(&mut s.store, rates[i], &run)?;
        out[i] = Some(run);
    }
    s.store.save()?;
    Ok(out.into_iter().map(|r| r.expect("filled above")).collect())
}

fn print_profile(rate: Rate, run: &ProfileRun) {
    println!(
        "{} profile (r = {}): z* = {:.15e}  bracket width {:.2e}  ({} bisections)",
        rate.name(),
        run.r_eff,
        run.z_star,
        run.width(),
        run.iterations
    );
    let e = &run.estimates;
    for c in e.reports() {
        println!(
            "  {:<14} {}  worst {:+.3e} at z = {:.4e} (tol {:.1e}, {} samples)",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.worst_value,
            c.worst_z,
            c.tolerance,
            c.n_samples
        );
    }
    let sol = &run.solution;
    println!(
        "  tail slope {}  blow-up exponent {}  decay {:?}",
        fmt_opt(sol.decay_slope_fit),
        fmt_opt(sol.blow_exp_fit),
        sol.decay_class
    );
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into())
}

fn profile(s: &mut Session, rates: &[Rate]) -> Result<()> {
    let runs = ensure_profiles(s, rates)?;
    let mut ok = true;
    for (&rate, run) in rates.iter().zip(&runs) {
        print_profile(rate, run);
        ok &= run.estimates.all_pass();
    }
    s.store.finish_stage("profile")?;
    if !ok {
        return Err(Exit(5, "profile estimate checks failed".into()).into());
    }
    Ok(())
}

fn replay_profiles(s: &Session, rates: &[Rate]) -> Result<()> {
    let mut ok = true;
    for &rate in rates {
        let run = load_profile(&s.store, rate)?
            .ok_or_else(|| Exit(2, format!("no stored {} profile in {}", rate.name(), s.store.root().display())))?;
        let replay = verify_profile_estimates(&run.solution, &s.cfg.shooting);
        let same = replay == run.estimates;
        print_profile(rate, &ProfileRun { estimates: replay.clone(), ..run });
        println!("  replayed report {} the stored one", if same { "matches" } else { "DIFFERS from" });
        ok &= same && replay.all_pass();
    }
    if !ok {
        return Err(Exit(5, "replayed profile checks failed".into()).into());
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct TrajectoryMeta {
    times: Vec<f64>,
    snapshot_stats: Vec<SnapshotStats>,
    stats: RunStats,
    complete: bool,
    failure: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotMeta {
    t: f64,
}

fn snapshot_name(i: usize) -> String {
    format!("snapshots/u_{i:03}")
}

fn load_trajectory(store: &ArtifactStore) -> Result<Option<(Grid, Vec<Field>)>> {
    if !(store.has_stage("simulate") && store.is_intact("trajectory.json")) {
        return Ok(None);
    }
    let meta: TrajectoryMeta = store.read_json("trajectory")?;
    let mut grid = None;
    let mut fields = Vec::with_capacity(meta.times.len());
    for (i, &t) in meta.times.iter().enumerate() {
        let (table, sm): (Table, SnapshotMeta) = store.read_table(&snapshot_name(i))?;
        if sm.t != t {
            return Err(Error::Artifact(format!("snapshot {i} has t = {}, trajectory says {t}", sm.t)).into());
        }
        let (g, f) = field_from_table(&table, t)?;
        grid.get_or_insert(g);
        fields.push(f);
    }
    Ok(grid.map(|g| (g, fields)))
}

fn simulate(s: &mut Session) -> Result<(Grid, Vec<Field>)> {
    if let Some(found) = load_trajectory(&s.store)? {
        println!("reusing stored trajectory ({} snapshots)", found.1.len());
        return Ok(found);
    }
    let in_scope = classify_regime(&s.cfg.model).map(|r| r.in_scope).unwrap_or(false);
    if s.cfg.reaction != ReactionChoice::Zero && in_scope {
        let upper = ensure_profiles(s, &[Rate::Upper])?;
        check_domain(&s.cfg, upper[0].z_star)?;
    }
    let (grid, traj) = pipeline::simulate(&s.cfg)?;
    for (i, f) in traj.snapshots.iter().enumerate() {
        s.store.write_table(&snapshot_name(i), &field_table(&grid, f), &SnapshotMeta { t: f.t })?;
    }
    let meta = TrajectoryMeta {
        times: traj.snapshots.iter().map(|f| f.t).collect(),
        snapshot_stats: traj.snapshot_stats.clone(),
        stats: traj.stats.clone(),
        complete: traj.complete,
        failure: traj.failure.clone(),
    };
    s.store.write_json("trajectory", &meta)?;
    println!(
        "{} snapshots, {} accepted / {} rejected steps, dt in [{:.3e}, {:.3e}]",
        traj.snapshots.len(),
        traj.stats.accepted,
        traj.stats.rejected,
        traj.stats.dt_min,
        traj.stats.dt_max
    );
    if !traj.complete {
        s.store.save()?;
        return Err(Exit(4, format!("solver stopped early: {}", traj.failure.unwrap_or_default())).into());
    }
    s.store.finish_stage("simulate")?;
    Ok((grid, traj.snapshots))
}

#[derive(Debug, Serialize, Deserialize)]
struct TrackMeta {
    lambda: f64,
    sigma_hat: Option<f64>,
    r2: Option<f64>,
    fit_from: f64,
    sigma: f64,
}

fn track_name(lambda: f64) -> String {
    format!("track_lambda_{lambda}")
}

fn track(s: &mut Session) -> Result<Vec<LevelSetTrack>> {
    let (grid, snaps) = simulate(s)?;
    let positive: Vec<Field> = snaps.into_iter().filter(|f| f.t > 0.0).collect();
    let decades = s.cfg.fit_decades();
    let tracks: Vec<LevelSetTrack> = s
        .cfg
        .analysis
        .lambdas
        .par_iter()
        .map(|&l| track_level_set(&grid, &positive, l, decades))
        .collect::<fastfront::Result<_>>()?;
    let sigma = s.cfg.model.sigma();
    for tr in &tracks {
        let mut table = Table::new(&["t", "x", "multiple"]);
        for ((&t, p), &multi) in tr.times.iter().zip(&tr.positions).zip(&tr.multiple_crossings) {
            table.push(vec![t, p.unwrap_or(f64::NAN), if multi { 1.0 } else { 0.0 }]);
        }
        let meta = TrackMeta { lambda: tr.lambda, sigma_hat: tr.sigma_hat, r2: tr.r2, fit_from: tr.fit_from, sigma };
        s.store.write_table(&track_name(tr.lambda), &table, &meta)?;
        println!(
            "lambda = {}: sigma_hat = {} (r2 {}) over t >= {:.4}; sigma = {sigma}",
            tr.lambda,
            fmt_opt(tr.sigma_hat),
            fmt_opt(tr.r2),
            tr.fit_from
        );
    }
    s.store.finish_stage("track")?;
    Ok(tracks)
}

fn print_residual(r: &ResidualReport) {
    println!(
        "  {:<34} {}  worst {:+.3e} (tol {:.1e}, {} samples)",
        r.region,
        if r.pass { "PASS" } else { "FAIL" },
        r.worst_value,
        r.tolerance,
        r.n_samples
    );
}

fn verify(s: &mut Session) -> Result<()> {
    let profiles = ensure_profiles(s, &[Rate::Upper, Rate::Reduced])?;
    let tracks = track(s)?;
    let (grid, snaps) = simulate(s)?;
    let rep: CertificateReport =
        pipeline::verify_certificates(&s.cfg, &grid, &snaps, &profiles[0], &profiles[1], &tracks)?;
    if let Some(sh) = &rep.supersolution {
        println!("supersolution shift T = {:.6} (tail {:.4}, front {:.4}, middle {:.4})", sh.t_shift, sh.t_tail, sh.t_front, sh.t_middle);
    }
    if let Some(r) = &rep.upper_comparison {
        print_residual(r);
    }
    println!("subsolution time T = {}", rep.subsolution_time);
    for r in &rep.subsolution_zones {
        print_residual(r);
    }
    match &rep.calibration {
        Some(c) => println!("subsolution placed below u: T' = {:.4}, X' = {:.4}", c.t_prime, c.x_shift),
        None => println!("subsolution could not be placed below u"),
    }
    if let Some(r) = &rep.lower_comparison {
        print_residual(r);
    }
    for sw in &rep.sandwich {
        let bad: Vec<String> = sw.failures().map(|e| format!("t = {:.2}: {:.4} not in ({:.4}, {:.4})", e.t, e.position, e.lower, e.upper)).collect();
        println!(
            "  sandwich lambda = {:<6} {}  {} times checked, {} outside, {} missing",
            sw.lambda,
            if sw.pass { "PASS" } else { "FAIL" },
            sw.entries.len(),
            bad.len(),
            sw.missing.len()
        );
        for b in bad {
            println!("    {b}");
        }
    }
    for n in &rep.notes {
        println!("note: {n}");
    }
    s.store.write_json("certificates", &rep)?;
    s.store.finish_stage("verify")?;
    if !rep.pass {
        return Err(Exit(5, "certificate suite failed".into()).into());
    }
    println!("verify: PASS");
    Ok(())
}

#[derive(Debug, Serialize)]
struct Summary {
    config_hash: String,
    stages: Vec<String>,
    regime: Option<serde_json::Value>,
    profiles: Vec<serde_json::Value>,
    tracks: Vec<serde_json::Value>,
    certificates_pass: Option<bool>,
}

fn report(s: &Session) -> Result<()> {
    let st = &s.store;
    let get = |name: &str| -> Option<serde_json::Value> {
        st.is_intact(&format!("{name}.json")).then(|| st.read_json(name).ok()).flatten()
    };
    let mut profiles = Vec::new();
    for rate in [Rate::Lower, Rate::Reduced, Rate::Upper] {
        if let Some(run) = load_profile(st, rate)? {
            profiles.push(serde_json::json!({
                "rate": rate.name(),
                "r_eff": run.r_eff,
                "z_star": run.z_star,
                "bracket_width": run.width(),
                "estimates_pass": run.estimates.all_pass(),
            }));
        }
    }
    let tracks = s
        .cfg
        .analysis
        .lambdas
        .iter()
        .filter_map(|&l| get(&track_name(l)).and_then(|v| v.get("meta").cloned()))
        .collect();
    let summary = Summary {
        config_hash: st.config_hash().to_string(),
        stages: st.manifest().stages.clone(),
        regime: get("regime"),
        profiles,
        tracks,
        certificates_pass: get("certificates").and_then(|v| v.get("pass").and_then(|p| p.as_bool())),
    };
    let text = serde_json::to_string_pretty(&summary)?;
    println!("{text}");
    std::fs::write(st.root().join("report.json"), text + "\n")?;
    Ok(())
}
