//! Implementations of the CLI subcommands.

use std::path::{Path, PathBuf};

use qmaxcut::compile::{compile_all_to_all, compile_swap_network};
use qmaxcut::graph::{brute_force_maxcut, read_graphs, sample_erdos_renyi, write_graphs, Graph};
use qmaxcut::gw::gw_maxcut;
use qmaxcut::qaoa::Protocol;
use qmaxcut::train::{
    init_protocol, read_checkpoint, train_with_eval, write_checkpoint, EvalSet,
};

use crate::config::{seeds, ExperimentConfig};
use crate::util::{atomic_write, csv, spearman_vs_index};
use crate::{CliError, CompileArgs, Topology};

fn train_graphs_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("train_n{n}.graphs"))
}

fn test_graphs_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("test_n{n}.graphs"))
}

fn optima_path(graphs_path: &Path, out: Option<&Path>) -> PathBuf {
    sibling_with_suffix(graphs_path, out, "optima.csv")
}

fn checkpoint_path(dir: &Path, n: usize, p: usize) -> PathBuf {
    dir.join(format!("checkpoint_n{n}_p{p}.txt"))
}

fn history_path(dir: &Path, n: usize, p: usize) -> PathBuf {
    dir.join(format!("history_n{n}_p{p}.csv"))
}

/// `<out or input dir>/<input stem>.<suffix>`.
fn sibling_with_suffix(input: &Path, out: Option<&Path>, suffix: &str) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_owned());
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| input.parent().map(Path::to_path_buf))
        .unwrap_or_default();
    dir.join(format!("{stem}.{suffix}"))
}

fn load_graphs(path: &Path) -> Result<Vec<Graph>, CliError> {
    read_graphs(path)
        .map_err(|e| CliError::input(format!("cannot load graphs {}: {e}", path.display())))
}

fn sample_set(n: usize, count: usize, edge_prob: f64, master: u64, tag: u64) -> Vec<Graph> {
    (0..count)
        .map(|i| {
            let seed = seeds::derive(master, &[tag, n as u64, i as u64]);
            sample_erdos_renyi(n, edge_prob, seed).expect("validated ensemble parameters")
        })
        .collect()
}

/// Write train/test graph files for every node size in the config.
pub fn generate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    for &n in &cfg.node_sizes {
        for (tag, count, path) in [
            (
                seeds::TRAIN_GRAPHS,
                cfg.ensemble.train_size,
                train_graphs_path(&cfg.output_dir, n),
            ),
            (
                seeds::TEST_GRAPHS,
                cfg.ensemble.test_size,
                test_graphs_path(&cfg.output_dir, n),
            ),
        ] {
            let graphs = sample_set(n, count, cfg.ensemble.edge_prob, cfg.seed, tag);
            let mut buf = Vec::new();
            write_graphs(&graphs, &mut buf)?;
            atomic_write(&path, &buf)?;
            println!("wrote {} ({} graphs)", path.display(), graphs.len());
        }
    }
    Ok(())
}

fn brute_optima(graphs: &[Graph]) -> Result<Vec<f64>, CliError> {
    graphs
        .iter()
        .map(|g| Ok(brute_force_maxcut(g)?.value))
        .collect()
}

fn read_optima_csv(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read optima {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 2 {
            return Err(CliError::input(format!(
                "{}:{}: expected graph_index,opt_value[,assignment]",
                path.display(),
                idx + 1
            )));
        }
        let value: f64 = fields[1].parse().map_err(|_| {
            CliError::input(format!("{}:{}: invalid optimum", path.display(), idx + 1))
        })?;
        values.push(value);
    }
    Ok(values)
}

/// Train one protocol per (N, P) cell, writing a checkpoint and a history CSV
/// for each.
pub fn train(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let dir = &cfg.output_dir;
    for &n in &cfg.node_sizes {
        let train_set = load_graphs(&train_graphs_path(dir, n))?;
        let test_set = load_graphs(&test_graphs_path(dir, n))?;
        // Use precomputed optima when `brute` already ran; otherwise solve
        // in memory for the per-epoch test ratio.
        let optima_file = optima_path(&test_graphs_path(dir, n), None);
        let optima = if optima_file.exists() {
            read_optima_csv(&optima_file)?
        } else {
            brute_optima(&test_set)?
        };
        let eval_set = EvalSet {
            graphs: &test_set,
            optima: &optima,
        };

        for &p in &cfg.qaoa_steps {
            let cell_seed = seeds::derive(cfg.seed, &[seeds::TRAIN_CELL, n as u64, p as u64]);
            let train_config = cfg.trainer.to_train_config(p, cell_seed);
            let record = train_with_eval(&train_set, &train_config, Some(&eval_set))?;

            let mut buf = Vec::new();
            write_checkpoint(&record, &train_config, &mut buf)?;
            atomic_write(&checkpoint_path(dir, n, p), &buf)?;

            let rows: Vec<Vec<String>> = record
                .history
                .iter()
                .map(|row| {
                    vec![
                        row.epoch.to_string(),
                        row.train_objective.to_string(),
                        row.test_ratio.map(|r| r.to_string()).unwrap_or_default(),
                    ]
                })
                .collect();
            let history = csv(&["epoch", "train_objective", "test_ratio"], &rows);
            atomic_write(&history_path(dir, n, p), history.as_bytes())?;

            let last = record.history.last().expect("history has the initial row");
            println!(
                "trained n={n} p={p}: objective {:.6}, test ratio {:.6} ({} epochs)",
                last.train_objective,
                last.test_ratio.unwrap_or(f64::NAN),
                last.epoch,
            );
        }
    }
    Ok(())
}

/// Evaluate every checkpoint against its test set and the GW baseline run on
/// the identical graphs; emits `results.csv` and `eval_meta.txt`.
pub fn eval(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let dir = &cfg.output_dir;
    let mut rows = Vec::new();
    for &n in &cfg.node_sizes {
        let test_path = test_graphs_path(dir, n);
        let test_set = load_graphs(&test_path)?;
        let optima_file = optima_path(&test_path, None);
        if !optima_file.exists() {
            return Err(CliError::input(format!(
                "missing {}; run `qmaxcut brute --graphs {}` first",
                optima_file.display(),
                test_path.display()
            )));
        }
        let optima = read_optima_csv(&optima_file)?;
        if optima.len() != test_set.len() {
            return Err(CliError::input(format!(
                "{} lists {} optima for {} graphs",
                optima_file.display(),
                optima.len(),
                test_set.len()
            )));
        }

        // The GW column does not depend on P; compute it once per node size.
        let mut gw_ratio_sum = 0.0;
        for (i, (g, &opt)) in test_set.iter().zip(&optima).enumerate() {
            let seed = seeds::derive(cfg.seed, &[seeds::GW, n as u64, i as u64]);
            let result = gw_maxcut(g, cfg.gw_rounds, seed)?;
            gw_ratio_sum += if opt == 0.0 {
                1.0
            } else {
                result.best_cut.value / opt
            };
        }
        let mean_gw = gw_ratio_sum / test_set.len() as f64;

        for &p in &cfg.qaoa_steps {
            let ckpt = checkpoint_path(dir, n, p);
            let (record, _) = read_checkpoint(&ckpt).map_err(|e| {
                CliError::input(format!("cannot load checkpoint {}: {e}", ckpt.display()))
            })?;
            let metrics = qmaxcut::train::evaluate(&test_set, &record.protocol, &optima)?;
            println!(
                "eval n={n} p={p}: qaoa {:.6}, gw {:.6}",
                metrics.mean_ratio, mean_gw
            );
            rows.push(vec![
                n.to_string(),
                p.to_string(),
                metrics.mean_ratio.to_string(),
                mean_gw.to_string(),
                test_set.len().to_string(),
                cfg.seed.to_string(),
            ]);
        }
    }
    let table = csv(
        &["n", "p", "mean_ratio_qaoa", "mean_ratio_gw", "n_graphs", "seed"],
        &rows,
    );
    let results = dir.join("results.csv");
    atomic_write(&results, table.as_bytes())?;

    let meta = format!(
        "gw_rounds {}\n\
         gw_ratio_semantics best-of-{}-rounds cut per graph, divided by the brute-force optimum, averaged across graphs\n\
         qaoa_ratio_semantics exact expected cut divided by the brute-force optimum, averaged across graphs\n\
         node_sizes {:?}\n\
         qaoa_steps {:?}\n\
         seed {}\n",
        cfg.gw_rounds, cfg.gw_rounds, cfg.node_sizes, cfg.qaoa_steps, cfg.seed
    );
    atomic_write(&dir.join("eval_meta.txt"), meta.as_bytes())?;
    println!("wrote {}", results.display());
    Ok(())
}

/// Run GW per graph and write `<stem>.gw.csv`.
pub fn gw(graphs_path: &Path, rounds: usize, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let graphs = load_graphs(graphs_path)?;
    let mut rows = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        let result = gw_maxcut(g, rounds, seeds::derive(seed, &[seeds::GW, i as u64]))?;
        rows.push(vec![
            i.to_string(),
            result.best_cut.value.to_string(),
            result.relaxation_value.to_string(),
            result.converged.to_string(),
        ]);
    }
    let path = sibling_with_suffix(graphs_path, out, "gw.csv");
    let table = csv(
        &["graph_index", "best_cut", "relaxation_value", "converged"],
        &rows,
    );
    atomic_write(&path, table.as_bytes())?;
    println!("wrote {} ({} graphs, {rounds} rounds)", path.display(), rows.len());
    Ok(())
}

/// Brute-force every graph and write `<stem>.optima.csv`.
pub fn brute(graphs_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let graphs = load_graphs(graphs_path)?;
    let mut rows = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        let result = brute_force_maxcut(g)?;
        rows.push(vec![
            i.to_string(),
            result.value.to_string(),
            result.assignment,
        ]);
    }
    let path = sibling_with_suffix(graphs_path, out, "optima.csv");
    let table = csv(&["graph_index", "opt_value", "assignment"], &rows);
    atomic_write(&path, table.as_bytes())?;
    println!("wrote {} ({} graphs)", path.display(), rows.len());
    Ok(())
}

/// Compile one graph for the chosen topology and write the circuit text.
pub fn compile(args: &CompileArgs) -> Result<(), CliError> {
    let graphs = load_graphs(&args.graphs)?;
    let graph = graphs.get(args.index).ok_or_else(|| {
        CliError::input(format!(
            "graph index {} out of range ({} graphs in {})",
            args.index,
            graphs.len(),
            args.graphs.display()
        ))
    })?;

    let protocol = match (&args.checkpoint, args.steps) {
        (Some(ckpt), _) => {
            let (record, _) = read_checkpoint(ckpt).map_err(|e| {
                CliError::input(format!("cannot load checkpoint {}: {e}", ckpt.display()))
            })?;
            record.protocol
        }
        (None, Some(steps)) => {
            let mut config = qmaxcut::TrainConfig::new(steps);
            config.seed = seeds::derive(args.seed, &[seeds::COMPILE]);
            init_protocol(&config)?
        }
        (None, None) => {
            return Err(CliError::input(
                "compile needs --checkpoint or --steps to fix the protocol",
            ))
        }
    };

    let (circuit, label) = match args.topology {
        Topology::AllToAll => (compile_all_to_all(graph, &protocol), "all_to_all"),
        Topology::Linear => (compile_swap_network(graph, &protocol)?, "linear"),
    };

    let suffix = format!("g{}.{}.circuit.txt", args.index, label);
    let path = sibling_with_suffix(&args.graphs, args.out.as_deref(), &suffix);
    let mut buf = Vec::new();
    circuit.write_text(&mut buf)?;
    atomic_write(&path, &buf)?;
    println!(
        "wrote {} ({} qubits, {} gates, {} CNOTs)",
        path.display(),
        circuit.num_qubits,
        circuit.gates.len(),
        circuit.cnot_count()
    );
    Ok(())
}

/// CNOT-count table over the (N, P) grid, cross-checked against compiled
/// circuits.
pub fn resources(node_sizes: &[usize], steps: &[usize], out: &Path) -> Result<(), CliError> {
    if node_sizes.iter().any(|&n| n < 2) {
        return Err(CliError::input("resources needs node sizes >= 2"));
    }
    if steps.iter().any(|&p| p == 0) {
        return Err(CliError::input("resources needs step counts >= 1"));
    }
    let mut rows = Vec::new();
    for &n in node_sizes {
        for &p in steps {
            let all_to_all = n * (n - 1) * p;
            let swap_network = 3 * n * (n - 1) * p / 2;

            let complete = Graph::complete(n)?;
            let protocol = Protocol::new(vec![0.0; p], vec![0.0; p])?;
            let compiled_all = compile_all_to_all(&complete, &protocol).cnot_count();
            let compiled_swap = compile_swap_network(&complete, &protocol)?.cnot_count();
            if compiled_all != all_to_all || compiled_swap != swap_network {
                return Err(CliError::numeric(format!(
                    "CNOT cross-check failed at n={n} p={p}: compiled {compiled_all}/{compiled_swap}, formulas {all_to_all}/{swap_network}"
                )));
            }
            rows.push(vec![
                n.to_string(),
                p.to_string(),
                all_to_all.to_string(),
                swap_network.to_string(),
            ]);
        }
    }
    let table = csv(
        &["n", "p", "cnots_all_to_all_complete", "cnots_swap_network"],
        &rows,
    );
    let path = out.join("resources.csv");
    atomic_write(&path, table.as_bytes())?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

/// Dump `(p, beta_p, gamma_p)` rows from a checkpoint and report the rank
/// correlation of the gamma schedule with step index.
pub fn protocol_dump(checkpoint: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let (record, _) = read_checkpoint(checkpoint).map_err(|e| {
        CliError::input(format!(
            "cannot load checkpoint {}: {e}",
            checkpoint.display()
        ))
    })?;
    let protocol = &record.protocol;
    let rows: Vec<Vec<String>> = (0..protocol.steps())
        .map(|i| {
            vec![
                (i + 1).to_string(),
                protocol.betas()[i].to_string(),
                protocol.gammas()[i].to_string(),
            ]
        })
        .collect();
    let path = sibling_with_suffix(checkpoint, out, "protocol.csv");
    atomic_write(&path, csv(&["p", "beta", "gamma"], &rows).as_bytes())?;
    // An annealing-like schedule shows gammas increasing with p.
    println!(
        "wrote {} ({} steps); spearman(gamma, p) = {:.4}",
        path.display(),
        protocol.steps(),
        spearman_vs_index(protocol.gammas())
    );
    Ok(())
}
