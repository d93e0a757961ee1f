use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use netcascade::influence::{reduce_to_influence, ThresholdModel};
use netcascade::ingest::{
    build_network, bundled_fixture, fixture_three_sector, load_io_table, synthetic_table, write_io_table,
    BuildOptions, FormatOptions,
};
use netcascade::metrics::{budget_sweep, write_report, SweepConfig};
use netcascade::network::{EconomicNetwork, EquilibriumMode, NetworkData};
use netcascade::scenarios::{
    apply_shock, build_is_gadget, build_max_shock_gadget, evaluate_batch, find_max_shock, sample_shocks,
    write_batch_csv, GadgetSpec, ScenarioBatch, ShockHeuristic, ShockSpec,
};
use netcascade::{Network, Plan};
use serde_json::{json, Value};

use crate::{
    BudgetArgs, BuildArgs, CliError, Fixture, GadgetArgs, GadgetKind, GenFixtureArgs, InterveneArgs, MaxShockArgs,
    Mode, ShockArgs, SolveArgs, StressArgs,
};

pub fn load_network(path: &Path) -> Result<Network, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let data: NetworkData<f64> = serde_json::from_str(&text)?;
    Ok(EconomicNetwork::new(data)?)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn print_json(out: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// Gross returns of one scenario row.
fn read_shock(path: &Path, row: usize, m: usize) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let headers = reader.headers()?.clone();
    let gross: Vec<usize> = (0..headers.len()).filter(|&i| headers[i].starts_with("gross_")).collect();
    let columns: Vec<usize> = if gross.is_empty() { (0..headers.len()).collect() } else { gross };
    let record = reader
        .records()
        .nth(row)
        .ok_or_else(|| CliError::Input(format!("{} has no scenario row {row}", path.display())))??;
    let values = columns
        .iter()
        .map(|&c| {
            let cell = record.get(c).unwrap_or("").trim();
            cell.parse::<f64>().map_err(|_| CliError::Input(format!("gross return {cell:?} is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != m {
        return Err(CliError::Input(format!("shock has {} gross returns, network has {m} assets", values.len())));
    }
    Ok(values)
}

fn shocked(net: &Network, shock: &ShockArgs) -> Result<Network, CliError> {
    match &shock.shock {
        Some(path) => Ok(apply_shock(net, &read_shock(path, shock.row, net.m())?)?),
        None => Ok(net.clone()),
    }
}

fn budget_amount(net: &Network, b: &BudgetArgs) -> Result<f64, CliError> {
    if !(b.budget.is_finite() && b.budget >= 0.0) {
        return Err(CliError::Input(format!("budget {} must be finite and nonnegative", b.budget)));
    }
    Ok(if b.absolute { b.budget } else { b.budget * net.prices().iter().sum::<f64>() })
}

fn labels_of(net: &Network, firms: &BTreeSet<usize>) -> Vec<String> {
    firms.iter().map(|&i| net.labels()[i].clone()).collect()
}

pub fn cmd_build(args: &BuildArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let table = match (&args.input, args.fixture) {
        (_, Some(Fixture::ThreeSector)) => fixture_three_sector(),
        (_, Some(Fixture::Synthetic200)) => bundled_fixture(),
        (Some(path), None) => {
            if !args.delimiter.is_ascii() {
                return Err(CliError::Input(format!("delimiter {:?} is not ASCII", args.delimiter)));
            }
            let format = FormatOptions {
                delimiter: args.delimiter as u8,
                header_rows: args.header_rows,
                row_key_columns: args.key_columns,
                value_added_label: args.va_label.clone(),
                gross_output_label: args.go_label.clone(),
                skip_column_labels: args.skip_columns.clone(),
                year: None,
            };
            load_io_table(path, &format)?
        }
        (None, None) => return Err(CliError::Input("one of --input or --fixture is required".into())),
    };
    let options = BuildOptions { beta_factor: args.beta_factor, va_cutoff: args.va_cutoff };
    let net: Network = build_network(&table, &options)?;
    let baseline = net.solve_equilibrium(EquilibriumMode::BestCase)?;
    if !baseline.failed.is_empty() {
        return Err(CliError::Internal(format!("{} firms fail without a shock", baseline.default_count())));
    }
    write_json(&args.out, net.data())?;
    print_json(
        out,
        &json!({
            "sectors": table.n(),
            "firms": net.n(),
            "dropped": table.n() - net.n(),
            "assets": net.m(),
            "total_assets": net.prices().iter().sum::<f64>(),
            "baseline_defaults": baseline.default_count(),
            "out": args.out.display().to_string(),
        }),
    )
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let net = shocked(&load_network(&args.net)?, &args.shock)?;
    let mode = match args.mode {
        Mode::Best => EquilibriumMode::BestCase,
        Mode::Worst => EquilibriumMode::WorstCase,
    };
    let eq = net.solve_equilibrium(mode)?;
    let mut summary = json!({
        "mode": mode,
        "firms": net.n(),
        "defaults": eq.default_count(),
        "failed": labels_of(&net, &eq.failed),
        "total_market_value": eq.total_market_value(),
    });
    if args.per_firm {
        let rows: Vec<Value> = (0..net.n())
            .map(|i| {
                json!({
                    "label": net.labels()[i],
                    "book_value": eq.book_values[i],
                    "market_value": eq.market_values[i],
                    "threshold": net.thresholds()[i],
                    "failed": eq.failed.contains(&i),
                })
            })
            .collect();
        summary["per_firm"] = Value::Array(rows);
    }
    print_json(out, &summary)
}

pub fn cmd_intervene(args: &InterveneArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let base = load_network(&args.net)?;
    let budget = budget_amount(&base, &args.budget)?;
    let net = shocked(&base, &args.shock)?;
    let model = ThresholdModel::uniform_band(args.band)?;
    let before = net.solve_equilibrium(EquilibriumMode::BestCase)?;
    let (record, after) = if before.failed.is_empty() {
        (Value::Null, before.clone())
    } else {
        let inst = reduce_to_influence(&net, &before)?;
        let plan: Plan = args.algo.run(&inst, &model, budget, args.replicates, args.seed)?;
        let after = net.apply_intervention(&plan.firm_payments(&inst, net.n()))?;
        (serde_json::to_value(plan.record(&inst))?, after)
    };
    let saved: BTreeSet<usize> = before.failed.difference(&after.failed).copied().collect();
    let result = json!({
        "algorithm": args.algo,
        "model": model,
        "budget": budget,
        "replicates": args.replicates,
        "seed": args.seed,
        "defaults_before": before.default_count(),
        "defaults_after": after.default_count(),
        "saved": labels_of(&net, &saved),
        "plan": record,
    });
    match &args.out {
        Some(path) => {
            write_json(path, &result)?;
            print_json(
                out,
                &json!({
                    "defaults_before": before.default_count(),
                    "defaults_after": after.default_count(),
                    "out": path.display().to_string(),
                }),
            )
        }
        None => print_json(out, &result),
    }
}

pub fn cmd_stress(args: &StressArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let net = load_network(&args.net)?;
    let spec = ShockSpec {
        rho: args.rho,
        sigma: args.sigma,
        drift: args.drift,
        floor: args.floor,
        count: args.scenarios,
        seed: args.seed,
    };
    let shocks = sample_shocks::<f64>(&spec, net.m())?;
    let config = SweepConfig {
        budgets: args.budgets.clone(),
        algorithm: args.algo,
        model: ThresholdModel::uniform_band(args.band)?,
        replicates: args.replicates,
        seed: args.seed,
    };
    let mut report = budget_sweep(&net, &shocks, &config)?;
    report.metadata.extra = json!({
        "shocks": spec,
        "quantiles": args.quantiles,
        "bin_width": args.bin_width,
    });
    let mut files = write_report(&args.out_dir, &report, &args.quantiles, args.bin_width)?;

    let batch = ScenarioBatch {
        gross: shocks,
        weights: vec![1.0; args.scenarios],
        adversarial: vec![false; args.scenarios],
        shift: vec![0.0; net.m() + 1],
    };
    let outcomes = evaluate_batch(&net, &batch)?;
    let path = args.out_dir.join("scenarios.csv");
    let mut file = BufWriter::new(File::create(&path)?);
    writeln!(file, "# {}", serde_json::to_string(&report.metadata)?)?;
    write_batch_csv(&mut file, &batch, &outcomes, true)?;
    file.flush()?;
    files.push(path);

    let tvar = match report.baseline_column() {
        Some(_) if report.scenarios() > 0 => serde_json::to_value(report.tvar_table(&args.quantiles)?)?,
        _ if report.scenarios() == 0 => return Err(CliError::Infeasible("no scenarios to report".into())),
        _ => Value::Null,
    };
    print_json(
        out,
        &json!({
            "scenarios": report.scenarios(),
            "budgets": report.budgets,
            "tvar": tvar,
            "files": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        }),
    )
}

pub fn cmd_maxshock(args: &MaxShockArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let net = load_network(&args.net)?;
    let budget = budget_amount(&net, &args.budget)?;
    let heuristic = if args.exact { ShockHeuristic::Exact } else { args.heuristic.into() };
    let r = find_max_shock(&net, budget, heuristic)?;
    print_json(
        out,
        &json!({
            "heuristic": heuristic,
            "budget": budget,
            "assets": r.assets,
            "cost": r.cost,
            "defaults": r.equilibrium.default_count(),
            "failed": labels_of(&net, &r.equilibrium.failed),
        }),
    )
}

fn parse_edge(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Input(format!("edge {s:?} is not of the form i-j"));
    let (a, b) = s.trim().split_once('-').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

pub fn cmd_gadget(args: &GadgetArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let edges = args
        .edges
        .iter()
        .filter(|e| !e.trim().is_empty())
        .map(|e| parse_edge(e))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = GadgetSpec::new(args.vertices, edges, args.k)?;
    let (net, budget, target): (Network, f64, usize) = match args.kind {
        GadgetKind::IndependentSet => {
            let g = build_is_gadget(&spec)?;
            (g.network, g.budget, g.target)
        }
        GadgetKind::MaxShock => {
            let g = build_max_shock_gadget(&spec)?;
            (g.network, g.budget, g.target)
        }
    };
    write_json(&args.out, net.data())?;
    print_json(
        out,
        &json!({
            "firms": net.n(),
            "assets": net.m(),
            "budget": budget,
            "target": target,
            "out": args.out.display().to_string(),
        }),
    )
}

pub fn cmd_gen_fixture(args: &GenFixtureArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.sectors == 0 {
        return Err(CliError::Input("--sectors must be at least 1".into()));
    }
    let table = synthetic_table(args.sectors, args.seed);
    write_io_table(BufWriter::new(File::create(&args.out)?), &table)?;
    print_json(out, &json!({ "sectors": table.n(), "out": args.out.display().to_string() }))
}
