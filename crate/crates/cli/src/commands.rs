use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use qosketch::eval::{
    estimation_benchmark, heuristic_scores, hits_at_k, mrr, random_pairs, run_benchmark, BenchConfig, BenchModel,
    EstimationSweep,
};
use qosketch::graph::{
    barabasi_albert, erdos_renyi, hop_neighborhoods_for, random_regular, split_edges, write_edge_list,
    DatasetSplit, EdgeListFormat, Graph, SplitRatios,
};
use qosketch::oracles::exact_de_count;
use qosketch::predictor::{train, Checkpoint, FeatureEngine, TrainConfig};
use qosketch::probe::{probe_expectation, ProbeConfig, ProbeKind, SageAggregation};
use qosketch::sketch::{feature_pairs, sample_signatures, HopSketch, SketchConfig, StructuralFeature};
use serde_json::json;

use crate::args::*;
use crate::io::{emit, load_graph, read_pairs, to_json, Loaded};

pub fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Gen(args) => gen(&args, seed.unwrap_or(0)),
        Command::Split(args) => split(&args, seed.unwrap_or(0)),
        Command::Estimate(args) => estimate(&args, seed.unwrap_or(0)),
        Command::Probe(args) => probe(&args, seed.unwrap_or(0)),
        Command::Train(args) => train_cmd(&args, seed),
        Command::Eval(args) => eval(&args),
        Command::Bench(BenchArgs { command: BenchCommand::Links(args) }) => bench_links(&args, seed),
        Command::Bench(BenchArgs { command: BenchCommand::Estimation(args) }) => {
            bench_estimation(&args, seed.unwrap_or(0))
        }
    }
}

fn edge_list_text(edges: impl IntoIterator<Item = (usize, usize)>, format: EdgeListFormat) -> Result<String> {
    let mut buf = Vec::new();
    write_edge_list(&mut buf, edges, format)?;
    Ok(String::from_utf8(buf)?)
}

fn gen(args: &GenArgs, seed: u64) -> Result<()> {
    let missing = |flag: &str| anyhow!("--{flag} is required for this model");
    let g = match args.model {
        GraphModel::Er => erdos_renyi(args.n, args.p.ok_or_else(|| missing("p"))?, seed)?,
        GraphModel::Ba => barabasi_albert(args.n, args.m.ok_or_else(|| missing("m"))?, seed)?,
        GraphModel::Rr => random_regular(args.n, args.d.ok_or_else(|| missing("d"))?, seed)?,
    };
    let format = args.out.as_deref().map_or(EdgeListFormat::Tsv, EdgeListFormat::from_path);
    emit(args.out.as_deref(), &edge_list_text(g.edges(), format)?)
}

fn split(args: &SplitArgs, seed: u64) -> Result<()> {
    let loaded = load_graph(&args.graph)?;
    let ratios = SplitRatios { train: args.ratios[0], valid: args.ratios[1], test: args.ratios[2] };
    let split = split_edges(&loaded.graph, ratios, seed)?;
    split.save(&args.out)?;
    let mut labels = String::new();
    for (i, l) in loaded.labels.iter().enumerate() {
        let _ = writeln!(labels, "{i}\t{l}");
    }
    std::fs::write(args.out.join("labels.txt"), labels)?;
    emit(None, &to_json(&split.manifest())?)
}

fn load_split(dir: &Path) -> Result<DatasetSplit> {
    DatasetSplit::load(dir).with_context(|| format!("loading split from {}", dir.display()))
}

fn resolve_source(source: &GraphSource) -> Result<(Loaded, Option<DatasetSplit>)> {
    match (&source.graph, &source.split) {
        (Some(spec), None) => Ok((load_graph(spec)?, None)),
        (None, Some(dir)) => {
            let split = load_split(dir)?;
            let graph = split.observed_graph(false);
            let labels = (0..graph.num_nodes() as i64).collect();
            Ok((Loaded { name: dir.display().to_string(), graph, labels }, Some(split)))
        }
        _ => bail!("exactly one of --graph or --split is required"),
    }
}

fn to_dense(loaded: &Loaded, pairs: &[(i64, i64)]) -> Result<Vec<(usize, usize)>> {
    let index: HashMap<i64, usize> = loaded.labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let find = |l: i64| index.get(&l).copied().ok_or_else(|| anyhow!("node {l} is not in the graph"));
    pairs.iter().map(|&(a, b)| Ok((find(a)?, find(b)?))).collect()
}

fn estimate(args: &EstimateArgs, seed: u64) -> Result<()> {
    let (loaded, split) = resolve_source(&args.source)?;
    let g = &loaded.graph;
    let pairs = if let Some(path) = &args.pairs {
        to_dense(&loaded, &read_pairs(path)?)?
    } else if args.all_test {
        let split = split.as_ref().expect("clap enforces --split");
        split.test_pos.iter().chain(&split.test_neg).copied().collect()
    } else {
        random_pairs(g.num_nodes(), args.random, seed)?
    };
    if let Some(&(u, _)) = pairs.iter().find(|(u, v)| u == v) {
        bail!("pair ({0},{0}) repeats a node", loaded.label(u));
    }
    let cfg = SketchConfig { dim: args.dim, hubs: args.hubs, hops: args.hops, seed, ..SketchConfig::default() };
    let sig = sample_signatures(&cfg, g)?;
    let mut nodes: Vec<usize> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let hops = hop_neighborhoods_for(g, args.hops, &nodes)?;
    let sketches: HashMap<usize, HopSketch> =
        nodes.iter().map(|&v| Ok((v, HopSketch::of(&sig, &hops, v)?))).collect::<Result<_>>()?;

    let mut out = String::from(if args.exact { "u,v,p,q,estimate,exact\n" } else { "u,v,p,q,estimate\n" });
    for &(u, v) in &pairs {
        let feature = StructuralFeature::from_sketches(&sketches[&u], &sketches[&v])?;
        for (p, q) in feature_pairs(args.hops) {
            let est = feature.get(p, q).expect("label within radius");
            let _ = write!(out, "{},{},{p},{q},{est}", loaded.label(u), loaded.label(v));
            if args.exact {
                let _ = write!(out, ",{}", exact_de_count(&hops, u, v, p, q)?);
            }
            out.push('\n');
        }
    }
    emit(args.out.as_deref(), &out)
}

fn probe(args: &ProbeArgs, seed: u64) -> Result<()> {
    let (loaded, u, v) = match &args.graph {
        Some(spec) => {
            let loaded = load_graph(spec)?;
            let (u, v) = to_dense(&loaded, &[(args.u as i64, args.v as i64)])?[0];
            (loaded, u, v)
        }
        None => {
            let graph = Graph::from_edges(3, [(0, 1), (1, 2)])?;
            (Loaded { name: "path3".into(), graph, labels: vec![0, 1, 2] }, args.u, args.v)
        }
    };
    let cfg = ProbeConfig {
        input_dim: args.input_dim,
        output_dim: args.output_dim,
        sigma_node: args.sigma_node,
        sigma_weight: args.sigma_weight,
        trials: args.trials,
        kind: match args.kind {
            Kind::Gcn => ProbeKind::Gcn,
            Kind::Sage => ProbeKind::Sage,
        },
        sage_aggregation: match args.aggregation {
            Aggregation::SqrtDegree => SageAggregation::SqrtDegree,
            Aggregation::Mean => SageAggregation::Mean,
        },
        seed,
    };
    let report = probe_expectation(&cfg, &loaded.graph, u, v)?;
    emit(args.out.as_deref(), &to_json(&report)?)
}

fn train_config(path: Option<&Path>, overrides: &TrainOverrides, seed: Option<u64>) -> Result<TrainConfig> {
    let mut cfg = match path {
        Some(p) => TrainConfig::from_json(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => TrainConfig::default(),
    };
    if let Some(e) = overrides.epochs {
        cfg.epochs = e;
    }
    if let Some(d) = overrides.dim {
        cfg.sketch.dim = d;
    }
    if let Some(h) = overrides.hubs {
        cfg.sketch.hubs = h;
    }
    if let Some(b) = overrides.batch_size {
        cfg.batch_size = b;
    }
    if let Some(lr) = overrides.lr {
        cfg.optimizer.learning_rate = lr;
    }
    if let Some(s) = seed {
        cfg.seed = s;
        cfg.sketch.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn train_cmd(args: &TrainArgs, seed: Option<u64>) -> Result<()> {
    let cfg = train_config(args.config.as_deref(), &args.overrides, seed)?;
    let split = load_split(&args.split)?;
    let outcome = train(&split, &cfg, None)?;
    let ckpt = Checkpoint::new(cfg, split.num_nodes, &outcome);
    ckpt.save(&args.out)?;
    let summary = json!({
        "parameters": outcome.params.num_parameters(),
        "epochs_run": outcome.history.len(),
        "best_epoch": outcome.best_epoch,
        "best_valid_hits": outcome.best_valid_hits,
        "history": outcome.history,
    });
    emit(None, &to_json(&summary)?)
}

fn eval(args: &EvalArgs) -> Result<()> {
    let split = load_split(&args.split)?;
    let (model, pos, neg) = if let Some(path) = &args.checkpoint {
        let ckpt = Checkpoint::load(path).with_context(|| format!("loading {}", path.display()))?;
        ensure!(
            ckpt.num_nodes == split.num_nodes,
            "checkpoint was trained on {} nodes, split has {}",
            ckpt.num_nodes,
            split.num_nodes
        );
        let observed = split.observed_graph(ckpt.config.include_valid);
        let engine = FeatureEngine::new(&observed, &ckpt.config, None)?;
        let pos = engine.score(&ckpt.params, &split.test_pos)?;
        let neg = engine.score(&ckpt.params, &split.test_neg)?;
        ("predictor", pos, neg)
    } else {
        let model = heuristic_model(args.heuristic.expect("clap enforces a model"));
        let observed = split.observed_graph(false);
        let pos = heuristic_scores(&observed, &model, &split.test_pos)?;
        let neg = heuristic_scores(&observed, &model, &split.test_neg)?;
        (model.name(), pos, neg)
    };
    let hits = hits_at_k(&pos, &neg, args.k)?;
    let pools = vec![neg.clone(); pos.len()];
    let report = json!({
        "model": model,
        "metric": format!("hits@{}", args.k),
        "hits": hits,
        "mrr": mrr(&pos, &pools)?,
        "num_pos": pos.len(),
        "num_neg": neg.len(),
    });
    emit(args.out.as_deref(), &to_json(&report)?)
}

fn heuristic_model(h: Heuristic) -> BenchModel {
    match h {
        Heuristic::Cn => BenchModel::Cn,
        Heuristic::Aa => BenchModel::Aa,
        Heuristic::Ra => BenchModel::Ra,
    }
}

fn bench_links(args: &LinksArgs, seed: Option<u64>) -> Result<()> {
    let loaded = load_graph(&args.graph)?;
    let model = match args.model {
        BenchModelArg::Cn => BenchModel::Cn,
        BenchModelArg::Aa => BenchModel::Aa,
        BenchModelArg::Ra => BenchModel::Ra,
        BenchModelArg::Predictor => {
            BenchModel::Predictor { config: train_config(args.config.as_deref(), &args.overrides, seed)? }
        }
    };
    let is_predictor = matches!(model, BenchModel::Predictor { .. });
    ensure!(!args.check || is_predictor, "--assert compares the predictor against CN; use --model predictor");
    let cfg = BenchConfig {
        repeats: args.repeats,
        seed: seed.unwrap_or(0),
        k: args.k,
        ..BenchConfig::new(loaded.name.clone(), model)
    };
    let summary = run_benchmark(&loaded.graph, &cfg)?;
    if let Some(path) = &args.csv {
        emit(Some(path), &summary.to_csv())?;
    }
    emit(args.json.as_deref(), &to_json(&summary)?)?;
    if args.check {
        let baseline = run_benchmark(&loaded.graph, &BenchConfig { model: BenchModel::Cn, ..cfg })?;
        eprintln!("predictor {:.4} vs cn {:.4}", summary.mean, baseline.mean);
        ensure!(
            summary.mean > baseline.mean,
            "predictor mean {:.4} does not exceed the CN baseline {:.4}",
            summary.mean,
            baseline.mean
        );
    }
    Ok(())
}

fn bench_estimation(args: &EstimationArgs, seed: u64) -> Result<()> {
    let loaded = load_graph(&args.graph)?;
    let g = &loaded.graph;
    let pairs = random_pairs(g.num_nodes(), args.pairs, seed)?;
    let sweep = EstimationSweep {
        dims: args.dims.clone(),
        hubs: args.hubs.clone(),
        hops: args.hops,
        seeds: (seed..seed + args.seeds).collect(),
    };
    let report = estimation_benchmark(g, &sweep, &pairs)?;
    if let Some(path) = &args.csv {
        emit(Some(path), &report.to_csv(args.timing))?;
    }
    let mut value = serde_json::to_value(&report)?;
    if !args.timing {
        for row in value["rows"].as_array_mut().into_iter().flatten() {
            row.as_object_mut().map(|r| r.remove("seconds"));
        }
    }
    value["dataset"] = json!(loaded.name);
    emit(args.json.as_deref(), &to_json(&value)?)?;

    if args.check {
        let mut failures = Vec::new();
        for &hubs in &sweep.hubs {
            if hubs >= g.num_nodes() {
                for row in report.rows.iter().filter(|r| r.hubs == hubs && r.p >= 1 && r.q >= 1 && r.mse != 0.0) {
                    failures.push(format!("hub-exact row #({},{}) at F={} has MSE {}", row.p, row.q, row.dim, row.mse));
                }
                continue;
            }
            for w in sweep.dims.windows(2) {
                if w[1] != 2 * w[0] {
                    continue;
                }
                let (a, b) = (report.mse(w[0], hubs, 1, 1), report.mse(w[1], hubs, 1, 1));
                let ratio = a.zip(b).map_or(f64::NAN, |(a, b)| a / b);
                if !(1.4..=2.6).contains(&ratio) {
                    failures.push(format!("#(1,1) MSE ratio {ratio:.3} from F={} to F={} (b={hubs})", w[0], w[1]));
                }
            }
        }
        for f in &failures {
            eprintln!("check failed: {f}");
        }
        ensure!(failures.is_empty(), "{} estimation check(s) failed", failures.len());
    }
    Ok(())
}
