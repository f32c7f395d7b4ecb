use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hemato_core::analysis::{
    check_existence, check_multiplicity, scan_envelopes, synthesize_lambdas, GammaRange, TimeGrid,
};
use hemato_core::dde::{integrate, InitialHistory, Mode};
use hemato_core::orbits::{find_all_orbits, validate_orbit, write_manifest, OrbitConfig, OrbitSearch, DEDUP_POINTS};
use hemato_core::{Model, Result};

use crate::config::{OrbitArgs, RunConfig};
use crate::{Command, StateVariable};

const BUNDLED_MODEL: &str = include_str!("../../../models/six_orbits.model");

/// Returns whether every checked condition held.
pub fn run(command: Command) -> Result<bool> {
    match command {
        Command::Classify { model } => classify(&Model::load(model)?),
        Command::Scan { model, gamma, grid } => {
            let config = RunConfig::new(Some(gamma), &grid, &OrbitArgs::default())?;
            scan(&Model::load(model)?, &config)
        }
        Command::Check {
            model,
            existence,
            gammas,
            gamma,
            grid,
            ..
        } => {
            let config = RunConfig::new(gamma, &grid, &OrbitArgs::default())?;
            let gammas = (!existence).then_some(gammas);
            check(&Model::load(model)?, gammas.as_deref(), &config)
        }
        Command::FindOrbits {
            model,
            gamma,
            grid,
            orbit,
        } => {
            let config = RunConfig::new(gamma, &grid, &orbit)?;
            find_orbits(&Model::load(model)?, &config)
        }
        Command::Simulate {
            model,
            x0,
            periods,
            steps_per_period,
            mode,
            out,
        } => {
            let mode = match mode {
                StateVariable::Log => Mode::Log,
                StateVariable::X => Mode::X,
            };
            simulate(&Model::load(model)?, x0, periods, steps_per_period, mode, &out)
        }
        Command::Synthesize {
            model,
            gamma1,
            epsilon,
            grid,
        } => {
            let config = RunConfig::new(None, &grid, &OrbitArgs::default())?;
            synthesize(&Model::load(model)?, gamma1, epsilon, &config)
        }
        Command::ReproduceExample {
            model,
            gamma,
            grid,
            orbit,
        } => {
            let config = RunConfig::new(gamma, &grid, &orbit)?;
            let (model, source) = match model {
                Some(path) => (Model::load(&path)?, path.display().to_string()),
                None => (Model::from_toml_str(BUNDLED_MODEL)?, "bundled".to_string()),
            };
            reproduce_example(&model, &source, &config)
        }
    }
}

fn classify(model: &Model) -> Result<bool> {
    let classes = model.classify();
    println!("{classes}");
    for (k, term) in model.terms().iter().enumerate() {
        println!(
            "term {}: lambda={} m={} n={} class=M{}",
            k + 1,
            term.lambda,
            term.m,
            term.n,
            classes.class_of(k).index()
        );
    }
    Ok(true)
}

fn scan(model: &Model, config: &RunConfig) -> Result<bool> {
    config.create_out_dir()?;
    let env = scan_envelopes(model, &config.gamma, config.t_points, true)?;
    env.write_values_csv(config.out.join("envelope.csv"))?;
    env.write_summary_csv(config.out.join("envelope_summary.csv"))?;
    let search = hemato_core::analysis::alternation_intervals(&hemato_core::analysis::alternation_chain(
        model,
        &env,
        config.margin_floor,
    ));
    println!("gammas: {}  t points: {}", env.gammas.len(), env.times.len());
    println!("alternation intervals: {}", search.len());
    for iv in &search {
        println!("  ({}, {})", fmt_end(iv.lo), fmt_end(iv.hi));
    }
    Ok(true)
}

fn check(model: &Model, gammas: Option<&[f64]>, config: &RunConfig) -> Result<bool> {
    let check_config = config.check_config();
    let report = match gammas {
        None => check_existence(model, &check_config),
        Some(gammas) => check_multiplicity(model, gammas, &check_config)?,
    };
    let text = report.to_text();
    config.create_out_dir()?;
    fs::write(config.out.join("report.toml"), &text)?;
    print!("{text}");
    Ok(report.is_satisfied())
}

fn orbit_table(model: &Model, search: &OrbitSearch, orbit_config: &OrbitConfig, out: &mut String) -> Result<bool> {
    let _ = writeln!(
        out,
        "{:>3} {:>15} {:>15} {:>15} {:>10} {:>10} {:>10} {:>6}",
        "id", "mean", "y_min", "y_max", "residual", "amplitude", "period_map", "valid"
    );
    let mut all_valid = true;
    for (i, orbit) in search.orbits.iter().enumerate() {
        let v = validate_orbit(model, orbit, orbit_config)?;
        all_valid &= v.passed();
        let _ = writeln!(
            out,
            "{:>3} {:>15.9} {:>15.9} {:>15.9} {:>10.2e} {:>10.3e} {:>10.2e} {:>6}",
            i,
            orbit.mean(),
            orbit.y_min,
            orbit.y_max,
            orbit.residual_norm,
            orbit.amplitude(),
            v.period_map_discrepancy,
            if v.passed() { "yes" } else { "NO" }
        );
        for failure in &v.failures {
            eprintln!("warning: orbit {i}: {failure}");
        }
    }
    Ok(all_valid)
}

fn write_orbits(search: &OrbitSearch, out: &Path) -> Result<()> {
    for (i, orbit) in search.orbits.iter().enumerate() {
        orbit.write_csv(out.join(format!("orbit_{i}.csv")), DEDUP_POINTS)?;
    }
    write_manifest(&search.orbits, out.join("manifest.csv"))
}

fn find_orbits(model: &Model, config: &RunConfig) -> Result<bool> {
    let env = scan_envelopes(model, &config.gamma, config.t_points, false)?;
    let search = find_all_orbits(model, &env, &config.orbit)?;
    config.create_out_dir()?;
    write_orbits(&search, &config.out)?;
    let mut text = String::new();
    let _ = writeln!(text, "predicted: {}", search.predicted);
    let _ = writeln!(
        text,
        "found: {} (seeds tried {}, converged {})",
        search.orbits.len(),
        search.seeds_tried,
        search.seeds_converged
    );
    orbit_table(model, &search, &config.orbit, &mut text)?;
    print!("{text}");
    for w in &search.warnings {
        eprintln!("warning: {w}");
    }
    Ok(search.orbits.len() >= search.predicted)
}

fn simulate(model: &Model, x0: f64, periods: f64, steps_per_period: usize, mode: Mode, out: &Path) -> Result<bool> {
    let t1 = periods * model.period();
    let trajectory = integrate(model, &InitialHistory::Constant(x0), (0.0, t1), steps_per_period, mode)?;
    fs::create_dir_all(out)?;
    trajectory.write_csv(out.join("trajectory.csv"))?;
    let (t, v) = trajectory.last();
    let (x, y) = match mode {
        Mode::Log => (v.exp(), v),
        Mode::X => (v, v.ln()),
    };
    println!("steps: {}  step: {:e}  subdivision: {}", trajectory.len() - 1, trajectory.step, trajectory.subdivision);
    println!("t = {t:.9}  x = {x:.12e}  y = {y:.12e}");
    Ok(true)
}

fn synthesize(model: &Model, gamma1: f64, epsilon: f64, config: &RunConfig) -> Result<bool> {
    let terms = model.terms();
    let r: Vec<_> = terms.iter().map(|t| t.r.clone()).collect();
    let m: Vec<f64> = terms.iter().map(|t| t.m).collect();
    let n: Vec<f64> = terms.iter().map(|t| t.n).collect();
    let s = synthesize_lambdas(&r, model.b(), &m, &n, gamma1, epsilon)?;
    let result = model.with_lambdas(&s.lambdas)?;
    let grid = TimeGrid::new(&result, config.t_points);
    let min_alpha = grid.min_alpha(&result, s.gamma1);
    let max_beta = grid.max_beta(&result, s.gamma2);
    config.create_out_dir()?;
    fs::write(config.out.join("synthesized.model"), result.to_toml_string())?;
    let lambdas: Vec<String> = s.lambdas.iter().map(|l| format!("{l:.12e}")).collect();
    println!("lambdas = [{}]", lambdas.join(", "));
    println!("gamma1 = {}", s.gamma1);
    println!("gamma2 = {}", s.gamma2);
    println!("epsilon = {}", s.epsilon);
    println!("min_t alpha(gamma1, t) = {min_alpha:.6e}");
    println!("max_t beta(gamma2, t) = {max_beta:.6e}");
    Ok(min_alpha > 0.0 && max_beta < 0.0)
}

#[derive(Clone, Copy)]
enum Envelope {
    Alpha,
    Beta,
}

/// Pointwise inequalities claimed for the bundled example.
const EXAMPLE_INEQUALITIES: [(Envelope, f64, f64); 5] = [
    (Envelope::Alpha, -0.3, 0.09),
    (Envelope::Alpha, 5.0, 0.1),
    (Envelope::Beta, -5.0, -0.08),
    (Envelope::Beta, 0.2, -0.01),
    (Envelope::Beta, 34.0, -0.01),
];
const EXAMPLE_GAMMAS: [f64; 3] = [-5.0, -0.3, 0.2];

fn reproduce_example(model: &Model, source: &str, config: &RunConfig) -> Result<bool> {
    let mut text = String::new();
    let _ = writeln!(text, "model: {source}");
    let _ = writeln!(text, "classification: {}", model.classify());
    let _ = writeln!(text, "C = T * mean(b) = {:.6e}", model.decay_integral());

    let grid = TimeGrid::new(model, config.t_points);
    let mut rows = vec!["inequality,achieved,slack,status".to_string()];
    let _ = writeln!(text, "\n{:<28} {:>12} {:>12} {:>6}", "inequality", "achieved", "slack", "status");
    let mut all_rows = true;
    for (envelope, gamma, threshold) in EXAMPLE_INEQUALITIES {
        let (label, achieved, slack) = match envelope {
            Envelope::Alpha => {
                let a = grid.min_alpha(model, gamma);
                (format!("min_t alpha({gamma}, t) > {threshold}"), a, a - threshold)
            }
            Envelope::Beta => {
                let b = grid.max_beta(model, gamma);
                (format!("max_t beta({gamma}, t) < {threshold}"), b, threshold - b)
            }
        };
        let status = if slack > 0.0 { "PASS" } else { "FAIL" };
        all_rows &= slack > 0.0;
        let _ = writeln!(text, "{label:<28} {achieved:>12.6e} {slack:>12.4e} {status:>6}");
        rows.push(format!("\"{label}\",{achieved:.12e},{slack:.12e},{status}"));
    }

    let report = check_multiplicity(model, &EXAMPLE_GAMMAS, &config.check_config())?;
    let cases: Vec<&str> = report.satisfied_cases().map(|c| c.case).collect();
    let _ = writeln!(
        text,
        "\nmultiplicity at gammas {:?}: {} (cases [{}]), predicted >= {}",
        EXAMPLE_GAMMAS,
        report.verdict,
        cases.join(", "),
        report.predicted_solution_count
    );

    let env = scan_envelopes(model, &config.gamma, config.t_points, false)?;
    let search = find_all_orbits(model, &env, &config.orbit)?;
    let GammaRange { lo, hi, step } = config.gamma;
    let _ = writeln!(
        text,
        "alternation chain on [{lo}, {hi}] step {step}: predicted >= {}",
        search.predicted
    );
    for (iv, band) in search.intervals.iter().zip(&search.seeded_bands) {
        let _ = writeln!(
            text,
            "  ({}, {})  seeded on ({:.6}, {:.6})",
            fmt_end(iv.lo),
            fmt_end(iv.hi),
            band.0,
            band.1
        );
    }
    let _ = writeln!(
        text,
        "\norbits found: {} of predicted {} (seeds tried {}, converged {})",
        search.orbits.len(),
        search.predicted,
        search.seeds_tried,
        search.seeds_converged
    );
    let all_valid = orbit_table(model, &search, &config.orbit, &mut text)?;
    for w in &search.warnings {
        eprintln!("warning: {w}");
    }

    let passed = all_rows && report.is_satisfied() && all_valid && search.orbits.len() >= search.predicted;
    let _ = writeln!(text, "\nresult: {}", if passed { "PASS" } else { "FAIL" });

    config.create_out_dir()?;
    fs::write(config.out.join("inequalities.csv"), rows.join("\n") + "\n")?;
    fs::write(config.out.join("summary.txt"), &text)?;
    fs::write(config.out.join("report.toml"), report.to_text())?;
    write_orbits(&search, &config.out)?;
    print!("{text}");
    Ok(passed)
}

fn fmt_end(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "+inf" } else { "-inf" }.to_string()
    } else {
        format!("{v}")
    }
}

