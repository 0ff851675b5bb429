use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use dslm_core::dslm::{
    best_response, cost_of_cooperation, evaluate_schedule, solve_centralized, Instance, Schedule,
    SearchBudget,
};
use dslm_core::dynamics::{
    basic_matrix, basin_monte_carlo, eigenvalues4, entry_analysis, intrinsic_matrix,
    jacobian_eigenvalues_coop, numeric_jacobian, BasinSummary, IntegratorConfig, PopulationState,
    StabilityReport, APA, PPA,
};
use dslm_core::game::{
    is_congestion_game, memory1_nash_equilibria, payoff_table, stage_cost, stage_nash_equilibria,
    turn_taking_beneficial, Action, Memory1Strategy, RepeatedGameParams,
};
use dslm_core::instances::{example_instance_sec2, generate_instance, manifest_csv, GeneratorConfig};
use dslm_core::learning::{gap_experiment, train, GapConfig, GapRow, TrainConfig};
use serde_json::{json, Value};

use crate::output::Output;
use crate::svg;
use crate::{
    BasinArgs, DslmArgs, DslmMode, EntryArgs, GameArgs, GapArgs, GenerateArgs, StageGameArgs,
    TrainArgs,
};

pub enum CliError {
    Core(dslm_core::error::Error),
    Io { path: PathBuf, source: io::Error },
    Input(String),
}

impl CliError {
    pub fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Core(e) => (e.kind(), e.to_string()),
            CliError::Io { path, source } => ("io", format!("{}: {source}", path.display())),
            CliError::Input(m) => ("input", m.clone()),
        };
        json!({ "error": { "kind": kind, "message": message } })
    }
}

impl From<dslm_core::error::Error> for CliError {
    fn from(e: dslm_core::error::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T = ()> = std::result::Result<T, CliError>;

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_at(path))
}

struct Session {
    out: Output,
    dir: PathBuf,
}

impl Session {
    fn open(dir: PathBuf, command: &str, params: &impl serde::Serialize) -> Result<Self> {
        let out = Output::new(dir.clone(), command, params).map_err(io_at(&dir))?;
        Ok(Self { out, dir })
    }

    fn io(&self, r: io::Result<()>) -> Result {
        r.map_err(io_at(&self.dir))
    }

    fn csv(&mut self, name: &str, body: &str) -> Result {
        let r = self.out.csv(name, body);
        self.io(r)
    }

    fn json(&mut self, name: &str, v: &impl serde::Serialize) -> Result {
        let r = self.out.json(name, v);
        self.io(r)
    }

    fn jsonl<T: serde::Serialize>(&mut self, name: &str, rows: &[T]) -> Result {
        let r = self.out.jsonl(name, rows);
        self.io(r)
    }

    fn raw(&mut self, name: &str, text: &str) -> Result {
        let r = self.out.raw(name, text);
        self.io(r)
    }

    fn svg(&mut self, name: &str, body: &str) -> Result {
        let r = self.out.svg(name, body);
        self.io(r)
    }

    /// List what was written on stdout.
    fn finish(self) -> Result {
        for p in self.out.written() {
            println!("{}", p.display());
        }
        Ok(())
    }
}

pub fn stage_game(a: &StageGameArgs, dir: PathBuf) -> Result {
    let params = RepeatedGameParams::new(a.p, a.delta)?;
    let mut s = Session::open(dir, "stage-game", a)?;
    let mut csv = String::from("action_1,action_2,cost_1,cost_2\n");
    for a1 in Action::ALL {
        for a2 in Action::ALL {
            let (c1, c2) = stage_cost(a1, a2, &params);
            let _ = writeln!(csv, "{a1},{a2},{c1},{c2}");
        }
    }
    let nash: Vec<String> = stage_nash_equilibria(&params)
        .iter()
        .map(|(x, y)| format!("{x}-{y}"))
        .collect();
    s.csv("stage_game.csv", &csv)?;
    s.json(
        "stage_game.json",
        &json!({
            "params": params,
            "congestion_game": is_congestion_game(&params),
            "turn_taking_beneficial": turn_taking_beneficial(&params),
            "stage_nash": nash,
        }),
    )?;
    s.finish()
}

pub fn repeated_payoffs(a: &GameArgs, dir: PathBuf) -> Result {
    let params = RepeatedGameParams::new(a.p, a.delta)?;
    let mut s = Session::open(dir, "repeated-payoffs", a)?;
    let table = payoff_table(&params);
    let nash = memory1_nash_equilibria(&params);
    let mut csv = String::from("strategy_1,strategy_2,cost_1,cost_2,normalized_1,normalized_2,nash\n");
    let mut rows = Vec::new();
    for (i, s1) in Memory1Strategy::ALL.iter().enumerate() {
        for (j, s2) in Memory1Strategy::ALL.iter().enumerate() {
            let c = table[i][j];
            let is_nash = nash.contains(&(*s1, *s2));
            let _ = writeln!(
                csv,
                "{s1},{s2},{},{},{},{},{is_nash}",
                c.cost_1, c.cost_2, c.normalized_1, c.normalized_2
            );
            rows.push(json!({ "strategy_1": s1.name(), "strategy_2": s2.name(), "costs": c, "nash": is_nash }));
        }
    }
    s.csv("payoffs.csv", &csv)?;
    let nash_names: Vec<[String; 2]> = nash.iter().map(|(x, y)| [x.name(), y.name()]).collect();
    s.json(
        "payoffs.json",
        &json!({ "params": params, "pairs": rows, "nash": nash_names }),
    )?;
    s.finish()
}

const STRATEGY_NAMES: [&str; 3] = ["PPP", "PPA", "APA"];

fn integrator(dt: f64, class_margin: f64) -> IntegratorConfig {
    IntegratorConfig {
        dt,
        class_margin,
        ..Default::default()
    }
}

pub fn basins(a: &BasinArgs, dir: PathBuf) -> Result {
    let params = RepeatedGameParams::new(a.p, a.delta)?;
    let matrix = |omega: Option<f64>| match omega {
        Some(w) => intrinsic_matrix(&params, w),
        None => Ok(basic_matrix(&params)),
    };
    let mat_x = matrix(a.omega.or(a.omega_x))?;
    let mat_y = matrix(a.omega.or(a.omega_y))?;
    let summary = basin_monte_carlo(&mat_x, &mat_y, a.runs, a.seed, &integrator(a.dt, a.class_margin))?;
    let mut s = Session::open(dir, "basins", a)?;
    s.csv(
        "basins.csv",
        &format!("{}\n{}\n", BasinSummary::CSV_HEADER, summary.csv_row()),
    )?;
    s.json("basins.json", &summary)?;
    s.jsonl("runs.jsonl", &summary.runs)?;
    let groups: Vec<(String, &[usize])> = (0..3)
        .map(|k| (format!("x {}", STRATEGY_NAMES[k]), &summary.hist_x[k][..]))
        .chain((0..3).map(|k| (format!("y {}", STRATEGY_NAMES[k]), &summary.hist_y[k][..])))
        .collect();
    let groups: Vec<(&str, &[usize])> = groups.iter().map(|(n, c)| (n.as_str(), *c)).collect();
    s.svg(
        "basins_hist.svg",
        &svg::histogram(
            &format!("Final shares, p={} delta={}", a.p, a.delta),
            &groups,
        ),
    )?;
    s.finish()
}

pub fn entry(a: &EntryArgs, dir: PathBuf) -> Result {
    if a.deltas.is_empty() {
        return Err(CliError::Input("--deltas needs at least one value".into()));
    }
    let points = entry_analysis(a.p, a.omega, &a.deltas, a.runs, a.seed, &IntegratorConfig::default())?;
    let mut s = Session::open(dir, "entry", a)?;
    let mut csv = format!("scenario,{}\n", BasinSummary::CSV_HEADER);
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for pt in &points {
        for (k, (name, sum)) in pt.scenarios().into_iter().enumerate() {
            let _ = writeln!(csv, "{name},{}", sum.csv_row());
            if series.len() < 6 {
                series.push((format!("{name} p1"), Vec::new()));
                series.push((format!("{name} p2"), Vec::new()));
            }
            series[2 * k].1.push((pt.delta, sum.mean_cost_p1));
            series[2 * k + 1].1.push((pt.delta, sum.mean_cost_p2));
        }
    }
    s.csv("entry.csv", &csv)?;
    s.json("entry.json", &points)?;
    let series: Vec<(&str, Vec<(f64, f64)>)> =
        series.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
    s.svg(
        "entry.svg",
        &svg::lines(
            &format!("Mean true cost, p={} omega={}", a.p, a.omega),
            "delta",
            "mean per-round cost",
            &series,
        ),
    )?;
    s.finish()
}

pub fn stability(a: &GameArgs, dir: PathBuf) -> Result {
    let params = RepeatedGameParams::new(a.p, a.delta)?;
    let closed = jacobian_eigenvalues_coop(&params);
    let basic = basic_matrix(&params);
    let numeric = |i, j| {
        StabilityReport::from_eigenvalues(eigenvalues4(&numeric_jacobian(
            &PopulationState::corner(i, j),
            &basic,
            &basic,
        )))
    };
    let corners = [("PPA_APA", numeric(PPA, APA)), ("APA_PPA", numeric(APA, PPA))];
    let mut s = Session::open(dir, "stability", a)?;
    let mut csv = String::from("source,index,re,im\n");
    let mut push = |src: &str, r: &StabilityReport| {
        for (k, e) in r.eigenvalues.iter().enumerate() {
            let _ = writeln!(csv, "{src},{k},{},{}", e.re, e.im);
        }
    };
    push("closed_form", &closed);
    for (name, r) in &corners {
        push(name, r);
    }
    s.csv("stability.csv", &csv)?;
    s.json(
        "stability.json",
        &json!({
            "params": params,
            "closed_form": closed,
            "numeric": { "PPA_APA": corners[0].1, "APA_PPA": corners[1].1 },
        }),
    )?;
    s.finish()
}

/// `"2;12"` or `"1,4;0"`: consumers split on `;`, appliances on `,`.
fn parse_starts(text: &str) -> Result<Schedule> {
    let start = text
        .split(';')
        .map(|row| {
            row.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|e| CliError::Input(format!("--starts: `{}`: {e}", t.trim())))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Schedule { start })
}

fn load_instance(path: Option<&Path>) -> Result<Instance> {
    match path {
        Some(p) => Ok(Instance::from_json(&read(p)?)?),
        None => Ok(example_instance_sec2()),
    }
}

pub fn dslm(a: &DslmArgs, dir: PathBuf) -> Result {
    let inst = load_instance(a.instance.as_deref())?;
    let budget = SearchBudget {
        max_nodes: a.max_nodes,
    };
    let given = match (&a.schedule, &a.starts) {
        (Some(p), _) => Some(Schedule::from_json(&read(p)?)?),
        (None, Some(t)) => Some(parse_starts(t)?),
        (None, None) => None,
    };
    let (name, schedule, extra) = match a.mode {
        DslmMode::Solve => {
            let (sched, _) = solve_centralized(&inst, &budget)?;
            ("solve", sched, Value::Null)
        }
        DslmMode::Evaluate => ("evaluate", given.unwrap_or_else(|| inst.pst_schedule()), Value::Null),
        DslmMode::BestResponse => {
            let base = given.unwrap_or_else(|| inst.pst_schedule());
            let coc = cost_of_cooperation(&inst, &base, a.consumer, &budget)?;
            let (sched, cost) = best_response(&inst, &base, a.consumer, &budget)?;
            let extra = json!({
                "consumer": a.consumer,
                "from": base,
                "best_response_cost": cost,
                "cost_of_cooperation": coc,
            });
            ("best_response", sched, extra)
        }
    };
    let breakdown = evaluate_schedule(&inst, &schedule)?;
    let mut s = Session::open(dir, "dslm", a)?;
    s.json(
        &format!("{name}.json"),
        &json!({ "schedule": schedule, "costs": breakdown, "best_response": extra }),
    )?;
    s.csv(&format!("{name}_series.csv"), &breakdown.slot_series_csv())?;
    s.finish()
}

pub fn generate(a: &GenerateArgs, dir: PathBuf) -> Result {
    let mut s = Session::open(dir, "generate", a)?;
    if a.example {
        s.raw("example.json", &example_instance_sec2().to_json())?;
        return s.finish();
    }
    let mut config = match &a.config {
        Some(p) => GeneratorConfig::from_json(&read(p)?)?,
        None => GeneratorConfig::default(),
    };
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    let mut files = Vec::new();
    for k in 0..a.count as u64 {
        let seed = config.seed.wrapping_add(k);
        let inst = generate_instance(&GeneratorConfig {
            seed,
            ..config.clone()
        })?;
        let file = format!("instance_{k:04}.json");
        s.raw(&file, &inst.to_json())?;
        files.push((file, seed));
    }
    s.csv("manifest.csv", &manifest_csv(&config, &files))?;
    s.finish()
}

pub fn train_cmd(a: &TrainArgs, dir: PathBuf) -> Result {
    let mut config = match &a.config {
        Some(p) => TrainConfig::from_json(&read(p)?)?,
        None => TrainConfig::default(),
    };
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if a.no_intrinsic {
        config.intrinsic.enabled = false;
    }
    let instances = if a.instance.is_empty() {
        vec![example_instance_sec2()]
    } else {
        a.instance
            .iter()
            .map(|p| load_instance(Some(p)))
            .collect::<Result<Vec<_>>>()?
    };
    let trace = train(&instances, &config)?;
    let mut s = Session::open(dir, "train", &json!({ "args": a, "config": config }))?;
    s.csv("trace.csv", &trace.csv())?;
    let probs: Vec<Vec<Vec<f64>>> = trace
        .policies
        .iter()
        .map(|pol| (0..pol.logits.len()).map(|c| pol.probs(c)).collect())
        .collect();
    s.json(
        "summary.json",
        &json!({
            "final_system_cost": trace.final_system_cost,
            "final_consumer_costs": trace.final_consumer_costs,
            "final_action_counts": trace.final_action_counts,
            "contexts": trace.contexts,
            "learners": trace.learners,
            "policy_probs": probs,
        }),
    )?;
    let mut series = vec![(
        "system".to_string(),
        trace.rows.iter().map(|r| (r.episode as f64, r.system_cost)).collect::<Vec<_>>(),
    )];
    for i in 0..trace.final_consumer_costs.len() {
        series.push((
            format!("consumer {i}"),
            trace.rows.iter().map(|r| (r.episode as f64, r.consumer_costs[i])).collect(),
        ));
    }
    let series: Vec<(&str, Vec<(f64, f64)>)> =
        series.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
    s.svg(
        "trace.svg",
        &svg::lines("Cost per day during training", "episode", "cost", &series),
    )?;
    s.finish()
}

pub fn gap(a: &GapArgs, dir: PathBuf) -> Result {
    let mut config = match &a.config {
        Some(p) => GapConfig::from_json(&read(p)?)?,
        None => GapConfig::default(),
    };
    if let Some(seed) = a.seed {
        config.generator.seed = seed;
    }
    let rows = gap_experiment(&config)?;
    let mut s = Session::open(dir, "gap", &json!({ "args": a, "config": config }))?;
    let mut csv = format!("{}\n", GapRow::CSV_HEADER);
    for r in &rows {
        let _ = writeln!(csv, "{}", r.csv_row());
    }
    s.csv("gap.csv", &csv)?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    s.json("gap.json", &json!({ "rows": rows, "max_ratio": max_ratio }))?;
    s.finish()
}
