use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde_json::json;

use skyroute::baselines::Planner;
use skyroute::eval::{evaluate, normalized_objective, oracle_optimal, rsrp_cdf, MissionMetrics};
use skyroute::radio::build_radio_map;
use skyroute::scenario::ScenarioConfig;
use skyroute::{RadioMap, Scenario, Trajectory, Weights};

use crate::options::{EvalArgs, GenArgs, MapArgs, PlanArgs, ScenarioArgs, TrainArgs, SWEEP_ALTITUDES};

fn load_scenario(args: &ScenarioArgs) -> Result<Scenario> {
    let mut s = match (&args.scenario, &args.config) {
        (Some(path), _) => Scenario::load(path).with_context(|| format!("loading {}", path.display()))?,
        (None, Some(path)) => {
            ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))?.build(args.seed())?
        }
        (None, None) => ScenarioConfig::default().build(args.seed())?,
    };
    if let Some(h) = args.altitude {
        s = s.at_altitude(h)?;
    }
    if let Some([en, sig, ho]) = args.weights {
        s = s.with_weights(Weights::new(en, sig, ho)?)?;
    }
    if let Some(n) = args.episodes {
        s.rl.max_episodes = n;
    }
    s.validate()?;
    Ok(s)
}

fn out_dir(args: &ScenarioArgs) -> Result<&Path> {
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    Ok(&args.out_dir)
}

fn tag(s: &Scenario) -> String {
    format!("h{}", s.grid.altitude)
}

fn write(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn get_map(scenario: &Scenario, map: Option<&Path>, mprime: usize) -> Result<RadioMap> {
    match map {
        Some(path) => {
            let m = RadioMap::load(path).with_context(|| format!("loading {}", path.display()))?;
            m.check_matches(scenario)?;
            Ok(m)
        }
        None => Ok(build_radio_map(scenario, mprime)?),
    }
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let s = load_scenario(&args.scenario)?;
    let path = out_dir(&args.scenario)?.join("scenario.toml");
    s.save(&path)?;
    println!("{} cells, {}x{} grid at {} m -> {}", s.cells.len(), s.grid.points, s.grid.points, s.grid.altitude, path.display());
    Ok(())
}

pub fn map(args: &MapArgs) -> Result<()> {
    let base = load_scenario(&args.scenario)?;
    let dir = out_dir(&args.scenario)?;
    let scenarios: Vec<Scenario> = if args.sweep {
        SWEEP_ALTITUDES.iter().map(|&h| base.at_altitude(h)).collect::<Result<_, _>>()?
    } else {
        vec![base]
    };
    let maps: Vec<RadioMap> =
        scenarios.par_iter().map(|s| build_radio_map(s, args.mprime)).collect::<Result<_, _>>()?;
    for (s, m) in scenarios.iter().zip(&maps) {
        m.save(dir.join(format!("map_{}.bin", tag(s))))?;
        write(dir.join(format!("heatmap_{}.csv", tag(s))), &m.heatmap_csv())?;
        println!("h={} m: coverage {:.1}% at {} dBm", s.grid.altitude, 100.0 * m.coverage_fraction(s.rsrp_threshold), s.rsrp_threshold);
    }
    Ok(())
}

fn save_mission(dir: &Path, name: &str, s: &Scenario, t: &Trajectory, metrics: &MissionMetrics) -> Result<()> {
    t.save_csv(dir.join(format!("trajectory_{name}_{}.csv", tag(s))), &s.grid)?;
    write(dir.join(format!("cdf_{name}_{}.csv", tag(s))), &rsrp_cdf(t)?.to_csv())?;
    write(dir.join(format!("metrics_{name}_{}.json", tag(s))), &serde_json::to_string_pretty(metrics)?)?;
    Ok(())
}

pub fn train(args: &TrainArgs) -> Result<()> {
    if args.planner == Planner::Shortest {
        anyhow::bail!(skyroute::Error::Invalid("the shortest-path planner has nothing to train".into()));
    }
    let s = load_scenario(&args.scenario)?;
    let dir = out_dir(&args.scenario)?;
    let map = get_map(&s, args.map.as_deref(), args.mprime)?;
    let (t, outcome) = args.planner.plan(&s, &map)?;
    let outcome = outcome.expect("learning planners return their training run");
    let name = args.planner.name();
    outcome.qtable.save(dir.join(format!("qtable_{name}_{}.bin", tag(&s))))?;
    outcome.log.save_csv(dir.join(format!("training_log_{name}_{}.csv", tag(&s))))?;
    let metrics = evaluate(&t, &s)?;
    save_mission(dir, name, &s, &t, &metrics)?;
    println!(
        "{name}: best episode {} (reward {:.4}), {} handoffs, {:.2}% disconnected, {:.2}% battery",
        outcome.best_episode, outcome.best_reward, metrics.handoffs, metrics.disconnectivity_pct, metrics.battery_pct
    );
    Ok(())
}

pub fn plan(args: &PlanArgs) -> Result<()> {
    let base = load_scenario(&args.scenario)?;
    let dir = out_dir(&args.scenario)?;
    let planners = if args.planner.is_empty() { Planner::ALL.to_vec() } else { args.planner.clone() };
    let scenarios: Vec<Scenario> = if args.sweep {
        SWEEP_ALTITUDES.iter().map(|&h| base.at_altitude(h)).collect::<Result<_, _>>()?
    } else {
        vec![base]
    };

    let mut table = String::from(
        "altitude_m,planner,handoffs,disconnectivity_m,disconnectivity_pct,battery_pct,energy_J,objective,normalized_objective,distance_m,waypoints,oracle_gap\n",
    );
    let mut report = Vec::new();
    for s in &scenarios {
        let map = get_map(s, args.map.as_deref(), args.mprime)?;
        let oracle = if args.oracle { Some(oracle_optimal(s, &map)?) } else { None };
        let runs: Vec<(Planner, Trajectory, MissionMetrics)> = planners
            .par_iter()
            .map(|&p| -> Result<_> {
                let (t, _) = p.plan(s, &map).with_context(|| format!("{p} at {} m", s.grid.altitude))?;
                let m = evaluate(&t, s)?;
                Ok((p, t, m))
            })
            .collect::<Result<_>>()?;
        for (p, t, m) in &runs {
            save_mission(dir, p.name(), s, t, m)?;
            let gap = oracle.as_ref().map(|o| m.normalized_objective - o.cost);
            let _ = writeln!(
                table,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                s.grid.altitude,
                p,
                m.handoffs,
                m.disconnectivity_m,
                m.disconnectivity_pct,
                m.battery_pct,
                m.energy_j,
                m.objective,
                m.normalized_objective,
                m.total_distance,
                m.waypoints,
                gap.map_or(String::new(), |g| g.to_string())
            );
            println!(
                "h={:>5} {:<11} handoffs {:>5}  disconnected {:>6.2}%  battery {:>6.2}%{}",
                s.grid.altitude,
                p.name(),
                m.handoffs,
                m.disconnectivity_pct,
                m.battery_pct,
                gap.map_or(String::new(), |g| format!("  oracle gap {g:.4}"))
            );
            report.push(json!({ "altitude_m": s.grid.altitude, "planner": p.name(), "metrics": m, "oracle_gap": gap }));
        }
    }
    write(dir.join("comparison.csv"), &table)?;
    write(dir.join("comparison.json"), &serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let s = load_scenario(&args.scenario)?;
    let dir = out_dir(&args.scenario)?;
    let text = fs::read_to_string(&args.trajectory).with_context(|| format!("reading {}", args.trajectory.display()))?;
    let t = Trajectory::from_csv(&text)?;
    if !t.is_well_formed() {
        anyhow::bail!(skyroute::Error::Invalid("trajectory has non-adjacent consecutive waypoints".into()));
    }
    let metrics = evaluate(&t, &s)?;
    let mut out = json!({ "metrics": metrics });
    if args.oracle {
        let map = get_map(&s, args.map.as_deref(), args.mprime)?;
        let o = oracle_optimal(&s, &map)?;
        out["oracle_cost"] = json!(o.cost);
        out["oracle_gap"] = json!(normalized_objective(&t, &s) - o.cost);
    }
    let stem = args.trajectory.file_stem().and_then(|x| x.to_str()).unwrap_or("trajectory");
    write(dir.join(format!("eval_{stem}.json")), &serde_json::to_string_pretty(&out)?)?;
    write(dir.join(format!("eval_cdf_{stem}.csv")), &rsrp_cdf(&t)?.to_csv())?;
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}
