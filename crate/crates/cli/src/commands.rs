use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use log::info;
use serde::{Deserialize, Serialize};
use stpm::io::{
    graph_document, patterns_document, write_csv, ConfigEcho, Manifest, Mode, Phase, Run, TripleRecord,
};
use stpm::{
    build_correlation_graph, build_sequence_db, emit_raw, generate, mine_approx_with_graph, oracle_mine,
    random_case, CorrelationGraph64, GeneratorConfig, GranularitySpec, MinerConfig, MiningResult,
    OracleLimits, PlantSpec, Pruning, RelationConfig, SeasonConfig, SequenceDatabase, SymbolicDatabase,
    Threshold,
};

use crate::{alloc, BenchArgs, GraphArgs, MineArgs};

#[derive(Default)]
struct Phases(Vec<Phase>);

impl Phases {
    fn run<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        alloc::reset_peak();
        let timer = Instant::now();
        let out = f();
        self.0.push(Phase {
            name: name.to_owned(),
            elapsed_ms: timer.elapsed().as_secs_f64() * 1e3,
            peak_bytes: Some(alloc::peak() as u64),
        });
        out
    }
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    Ok(builder.build()?)
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("cannot write {}", p.display())),
        None => Ok(writeln!(std::io::stdout().lock(), "{text}")?),
    }
}

struct Loaded {
    syb: SymbolicDatabase,
    seq: SequenceDatabase,
}

fn load(run: &Run, phases: &mut Phases) -> Result<Loaded> {
    let syb = phases.run("load", || run.load_symbolic())?;
    let seq = phases.run("sequence", || build_sequence_db(&syb, &run.granularity))?;
    info!(
        "{} series, {} granules, {} instances",
        seq.n_series(),
        seq.len(),
        seq.n_instances()
    );
    Ok(Loaded { syb, seq })
}

fn mine_mode(
    mode: Mode,
    cfg: &MinerConfig,
    data: &Loaded,
) -> stpm::Result<(MiningResult, Option<CorrelationGraph64>)> {
    match mode {
        Mode::Exact => Ok((stpm::mine(&data.seq, cfg)?, None)),
        Mode::Approx => {
            let (res, graph) = mine_approx_with_graph(&data.seq, &data.syb, cfg)?;
            Ok((res, Some(graph)))
        }
    }
}

fn correlation_graph(cfg: &MinerConfig, data: &Loaded) -> stpm::Result<CorrelationGraph64> {
    let n = data.seq.len();
    build_correlation_graph(&data.syb, &cfg.season.resolve(n)?, n)
}

pub fn mine(args: MineArgs) -> Result<ExitCode> {
    let run = args.run.config(args.mode)?.resolve()?;
    let pool = thread_pool(run.threads)?;
    let mut phases = Phases::default();
    let data = load(&run, &mut phases)?;
    let (result, graph) = pool.install(|| phases.run("mine", || mine_mode(run.mode, &run.miner, &data)))?;

    let graph_path = args.dump_graph.or_else(|| run.output.graph.clone());
    let graph = match graph {
        None if graph_path.is_some() => {
            Some(pool.install(|| phases.run("graph", || correlation_graph(&run.miner, &data)))?)
        }
        g => g,
    };

    let echo = ConfigEcho::new(run.mode, run.granularity.factor_m, &run.miner);
    let doc = patterns_document(&result, &data.seq, echo.clone());
    let patterns_path = args.out.or_else(|| run.output.patterns.clone());
    phases.run("write", || -> Result<()> {
        write_json(patterns_path.as_deref(), &doc)?;
        if let (Some(path), Some(g)) = (&graph_path, &graph) {
            write_json(Some(path), &graph_document(g))?;
        }
        Ok(())
    })?;

    for l in &result.stats.levels {
        info!(
            "level {}: generated {}, pruned {}, candidates {}, frequent {} ({:.1} ms)",
            l.level, l.generated, l.pruned, l.candidates, l.frequent, l.elapsed_ms
        );
    }
    let manifest = Manifest {
        config: echo,
        thresholds: result.stats.thresholds,
        n_series: data.seq.n_series(),
        n_granules: data.seq.len(),
        n_patterns: result.patterns.len(),
        levels: result.stats.levels.clone(),
        graph: result.stats.graph.clone(),
        phases: phases.0,
        memory_note: "peak_bytes is the allocator high-water mark within each phase (best-effort)".into(),
    };
    if let Some(path) = args.manifest.or_else(|| run.output.manifest.clone()) {
        write_json(Some(&path), &manifest)?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn graph(args: GraphArgs) -> Result<ExitCode> {
    let run = args.run.config(None)?.resolve()?;
    let pool = thread_pool(run.threads)?;
    let mut phases = Phases::default();
    let data = load(&run, &mut phases)?;
    let graph = pool.install(|| correlation_graph(&run.miner, &data))?;
    info!("{} of {} pairs carry an edge", graph.n_edges(), graph.pairs.len());
    let out = args.out.or_else(|| run.output.graph.clone());
    write_json(out.as_deref(), &graph_document(&graph))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long)]
    series: usize,
    /// Number of coarse granules.
    #[arg(long)]
    granules: usize,
    /// JSON list of plants, or an object with `plants` and optional `season` and `relation`.
    #[arg(long)]
    plants: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
    /// Planted patterns and their granules as JSON.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(short = 'm', long, default_value_t = 4)]
    factor_m: u32,
    #[arg(long, default_value_t = 2)]
    alphabet: u16,
    #[arg(long, default_value_t = 0.1)]
    switch_min: f64,
    #[arg(long, default_value_t = 0.5)]
    switch_max: f64,
    #[arg(long)]
    max_period: Option<Threshold>,
    #[arg(long)]
    min_density: Option<Threshold>,
    #[arg(long)]
    dist_min: Option<u32>,
    #[arg(long)]
    dist_max: Option<u32>,
    #[arg(long)]
    min_season: Option<u32>,
    #[arg(long)]
    epsilon: Option<u32>,
    #[arg(long)]
    min_overlap: Option<u32>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PlantsFile {
    List(Vec<PlantSpec>),
    Full {
        #[serde(default)]
        season: Option<SeasonConfig>,
        #[serde(default)]
        relation: Option<RelationConfig>,
        plants: Vec<PlantSpec>,
    },
}

#[derive(Serialize)]
struct Truth {
    events: Vec<String>,
    triples: Vec<TripleRecord>,
    granules: Vec<u32>,
}

pub fn gen(args: GenArgs) -> Result<ExitCode> {
    let (file_season, file_relation, plants) = match &args.plants {
        None => (None, None, Vec::new()),
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            match serde_json::from_str(&text)
                .with_context(|| format!("invalid plants file {}", path.display()))?
            {
                PlantsFile::List(p) => (None, None, p),
                PlantsFile::Full {
                    season,
                    relation,
                    plants,
                } => (season, relation, plants),
            }
        }
    };
    let pick = |flag: Option<Threshold>, file: Option<Threshold>, default: u32| {
        flag.or(file).unwrap_or(Threshold::Absolute(default))
    };
    // Without plants the thresholds only gate validation, so loose defaults do.
    let strict = !plants.is_empty();
    if strict && file_season.is_none() {
        let missing = [
            args.max_period.is_none(),
            args.min_density.is_none(),
            args.dist_min.is_none(),
            args.dist_max.is_none(),
            args.min_season.is_none(),
        ];
        if missing.iter().any(|&m| m) {
            bail!("plants need season thresholds: give `season` in the plants file or all five season flags");
        }
    }
    let season = SeasonConfig {
        max_period: pick(args.max_period, file_season.map(|s| s.max_period), 1),
        min_density: pick(args.min_density, file_season.map(|s| s.min_density), 1),
        dist_min: args.dist_min.or(file_season.map(|s| s.dist_min)).unwrap_or(1),
        dist_max: args
            .dist_max
            .or(file_season.map(|s| s.dist_max))
            .unwrap_or(args.granules.max(1) as u32),
        min_season: args.min_season.or(file_season.map(|s| s.min_season)).unwrap_or(1),
    };
    let base_rel = file_relation.unwrap_or_default();
    let relation = RelationConfig::new(
        args.epsilon.unwrap_or(base_rel.epsilon),
        args.min_overlap.unwrap_or(base_rel.min_overlap),
    )?;
    let cfg = GeneratorConfig {
        n_series: args.series,
        n_granules: args.granules,
        factor_m: args.factor_m,
        alphabet_size: args.alphabet,
        switch_prob: (args.switch_min, args.switch_max),
        season: season.resolve(args.granules)?,
        relation,
        seed: args.seed,
    };
    let syn = generate(&cfg, &plants)?;
    let ids: Vec<String> = syn.db.series().iter().map(|s| s.id.clone()).collect();
    write_csv(&args.out, &ids, &emit_raw(&syn.db, args.seed))?;
    info!(
        "wrote {} series x {} positions to {}",
        ids.len(),
        args.granules * args.factor_m as usize,
        args.out.display()
    );

    if let Some(path) = &args.truth {
        let seq = build_sequence_db(&syn.db, &GranularitySpec::new("tick", args.factor_m)?)?;
        let truth: Vec<Truth> = syn
            .planted
            .iter()
            .map(|p| Truth {
                events: p
                    .key
                    .events()
                    .iter()
                    .map(|&e| seq.event_label(e).to_string())
                    .collect(),
                triples: p
                    .key
                    .triples()
                    .into_iter()
                    .map(|t| TripleRecord {
                        relation: t.relation,
                        left: t.left,
                        right: t.right,
                    })
                    .collect(),
                granules: p.granules.clone(),
            })
            .collect();
        write_json(Some(path), &truth)?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct OracleDiffArgs {
    /// Number of random databases.
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    start: u64,
    #[arg(long, default_value_t = 6)]
    max_series: usize,
    #[arg(long, default_value_t = 30)]
    max_granules: usize,
    #[arg(short, long, default_value_t = 3)]
    k_max: usize,
    /// Also require every pruning combination to give the same patterns.
    #[arg(long)]
    pruning: bool,
}

fn canonical(res: &MiningResult, seq: &SequenceDatabase, cfg: &MinerConfig) -> Result<String> {
    let echo = ConfigEcho::new(Mode::Exact, seq.factor_m(), cfg);
    Ok(patterns_document(res, seq, echo).to_json()?)
}

pub fn oracle_diff(args: OracleDiffArgs) -> Result<ExitCode> {
    let limits = OracleLimits::default();
    let mut failed = 0;
    let mut patterns = 0;
    for seed in args.start..args.start + args.seeds {
        let case = random_case(seed, args.max_series, args.max_granules, args.k_max)?;
        let seq = build_sequence_db(&case.db, &case.granularity)?;
        let exact = stpm::mine(&seq, &case.miner)?;
        let want = canonical(&oracle_mine(&seq, &case.miner, &limits)?, &seq, &case.miner)?;
        let mut bad = canonical(&exact, &seq, &case.miner)? != want;
        if args.pruning {
            for (apriori, transitivity) in [(true, false), (false, true), (false, false)] {
                let cfg = case.miner.with_pruning(Pruning {
                    apriori,
                    transitivity,
                });
                bad |= canonical(&stpm::mine(&seq, &cfg)?, &seq, &case.miner)? != want;
            }
        }
        patterns += exact.patterns.len();
        if bad {
            failed += 1;
            println!("seed {seed}: mismatch");
        }
    }
    println!(
        "{} databases, {patterns} patterns, {failed} mismatches",
        args.seeds
    );
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

#[derive(Serialize)]
struct BenchRow {
    mode: Mode,
    runs: usize,
    min_ms: f64,
    median_ms: f64,
    peak_bytes: u64,
    patterns: usize,
    /// Share of the exact patterns this mode found.
    accuracy: f64,
    pruned_pairs: Option<f64>,
}

pub fn bench(args: BenchArgs) -> Result<ExitCode> {
    if args.modes.is_empty() || args.repeat == 0 {
        bail!("bench needs at least one mode and --repeat >= 1");
    }
    let run = args.run.config(None)?.resolve()?;
    let pool = thread_pool(run.threads)?;
    let data = load(&run, &mut Phases::default())?;
    let mut reference = None;
    let mut measured = Vec::new();
    for &mode in &args.modes {
        let mut times = Vec::with_capacity(args.repeat);
        let mut peak = 0;
        let mut last = None;
        for _ in 0..args.repeat {
            alloc::reset_peak();
            let timer = Instant::now();
            let out = pool.install(|| mine_mode(mode, &run.miner, &data))?;
            times.push(timer.elapsed().as_secs_f64() * 1e3);
            peak = peak.max(alloc::peak() as u64);
            last = Some(out);
        }
        let (res, graph) = last.expect("repeat >= 1");
        if mode == Mode::Exact && reference.is_none() {
            reference = Some(res.clone());
        }
        measured.push((mode, times, peak, res, graph));
    }
    let reference = match reference {
        Some(r) => r,
        None => pool.install(|| stpm::mine(&data.seq, &run.miner))?,
    };

    let rows: Vec<BenchRow> = measured
        .into_iter()
        .map(|(mode, mut times, peak, res, graph)| {
            times.sort_by(f64::total_cmp);
            let hits = res.keys().filter(|k| reference.find(k).is_some()).count();
            BenchRow {
                mode,
                runs: times.len(),
                min_ms: times[0],
                median_ms: times[times.len() / 2],
                peak_bytes: peak,
                patterns: res.patterns.len(),
                accuracy: if reference.patterns.is_empty() {
                    1.0
                } else {
                    hits as f64 / reference.patterns.len() as f64
                },
                pruned_pairs: graph.map(|g| g.pruned_fraction()),
            }
        })
        .collect();

    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "{:<8} {:>5} {:>12} {:>12} {:>10} {:>9} {:>9} {:>8}",
        "mode", "runs", "min_ms", "median_ms", "peak_mib", "patterns", "accuracy", "pruned"
    )?;
    for r in &rows {
        let pruned = r
            .pruned_pairs
            .map_or("-".to_owned(), |p| format!("{:.1}%", p * 100.0));
        writeln!(
            out,
            "{:<8} {:>5} {:>12.2} {:>12.2} {:>10.1} {:>9} {:>9.4} {:>8}",
            r.mode.to_string(),
            r.runs,
            r.min_ms,
            r.median_ms,
            r.peak_bytes as f64 / (1 << 20) as f64,
            r.patterns,
            r.accuracy,
            pruned
        )?;
    }
    drop(out);
    if let Some(path) = &args.json {
        write_json(Some(path), &rows)?;
    }
    Ok(ExitCode::SUCCESS)
}
