use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use semipovm::ait::{ait_identity_report, phi_inv_u64, AitTable, BitString, ScalarStageEnumerator};
use semipovm::constructions::{
    povm_sequence, semi_density_sigma, trace_deficiency_search, ApproxSequence, UniversalApprox, UniversalKind,
};
use semipovm::linalg::{format_rational, is_positive_definite, parse_rational, HermitianMatrix};
use semipovm::machine::{enumerate, enumerate_resume, ComplexityTable, EnumerateLimits};
use semipovm::measure::{matrix_k, sample_outcomes, verify_main_bounds, verify_optimality, DensityMatrix};
use semipovm::povm::{complete_to_povm, flatten, validate, OperatorMap};
use semipovm::random::random_density;

use crate::config::ConfigFile;
use crate::failure::Failure;
use crate::{
    AitArgs, Command, ConstructArgs, Ctx, DensityArgs, EnumerateArgs, OptimalityArgs, ReportCommand, SampleArgs,
    UniversalArgs, VerifyArgs, GLOBAL_KEYS,
};

const UNIVERSAL_KEYS: &[&str] = &["kind", "dim", "table", "support_len", "gh", "stage"];
/// Keeps supports at desk scale; 2^17 - 1 strings at most.
const MAX_SUPPORT_LEN: usize = 16;

pub fn run(ctx: &mut Ctx, file: &ConfigFile, command: Command) -> Result<(), Failure> {
    let keys: Vec<&str> = match &command {
        Command::Enumerate(_) => vec!["max_len", "max_steps", "resume", "len_cap", "steps_cap"],
        Command::Construct(_) => [UNIVERSAL_KEYS, &["seq_n", "budget", "drop_zero"]].concat(),
        Command::Verify(_) => vec!["povm", "rho", "table", "bounds", "random_rho"],
        Command::Sample(_) => vec!["povm", "rho", "trials"],
        Command::Report(ReportCommand::Ait(_)) => vec!["table", "max_len"],
        Command::Report(ReportCommand::Optimality(_)) => [UNIVERSAL_KEYS, &["rho", "random_rho"]].concat(),
        Command::Report(ReportCommand::Density(_)) => vec!["table", "dim", "eps", "search_budget"],
    };
    file.check_keys(&[GLOBAL_KEYS, &keys].concat())?;
    match command {
        Command::Enumerate(a) => cmd_enumerate(ctx, a),
        Command::Construct(a) => cmd_construct(ctx, a),
        Command::Verify(a) => cmd_verify(ctx, a),
        Command::Sample(a) => cmd_sample(ctx, a),
        Command::Report(ReportCommand::Ait(a)) => cmd_report_ait(ctx, a),
        Command::Report(ReportCommand::Optimality(a)) => cmd_report_optimality(ctx, a),
        Command::Report(ReportCommand::Density(a)) => cmd_report_density(ctx, a),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn json<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn load_table(path: &Path) -> Result<ComplexityTable, Failure> {
    Ok(ComplexityTable::from_json(&read(path)?)?)
}

fn load_povm(path: &Path) -> Result<OperatorMap, Failure> {
    let q = OperatorMap::from_json(&read(path)?)?;
    validate(&q)?;
    Ok(q)
}

/// A file path, or `maximally-mixed` for `I/N`.
fn load_rho(spec: &str, dim: usize) -> Result<DensityMatrix, Failure> {
    if spec == "maximally-mixed" {
        return Ok(DensityMatrix::maximally_mixed(dim));
    }
    let m: HermitianMatrix = serde_json::from_str(&read(Path::new(spec))?)
        .map_err(|e| Failure::Validation(format!("density matrix {spec}: {e}")))?;
    if m.dim() != dim {
        return Err(Failure::Validation(format!("density matrix has dimension {}, expected {dim}", m.dim())));
    }
    Ok(DensityMatrix::new(m)?)
}

fn max_mem() -> Result<Option<u64>, Failure> {
    match std::env::var("SEMIPOVM_MAX_MEM") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("SEMIPOVM_MAX_MEM must be a byte count, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

#[derive(Serialize)]
struct TableSummary {
    max_len: usize,
    max_steps: u64,
    halting: usize,
    outputs: usize,
    kraft_sum: String,
    min_k_upper: Option<u64>,
    max_k_upper: Option<u64>,
    k_upper_empty: Option<u64>,
}

fn summarize(t: &ComplexityTable) -> TableSummary {
    let ks: Vec<u64> = t.outputs().filter_map(|s| t.k_upper(s)).collect();
    TableSummary {
        max_len: t.max_len(),
        max_steps: t.max_steps(),
        halting: t.records().len(),
        outputs: ks.len(),
        kraft_sum: format_rational(&t.kraft_sum()),
        min_k_upper: ks.iter().min().copied(),
        max_k_upper: ks.iter().max().copied(),
        k_upper_empty: t.k_upper(&BitString::empty()),
    }
}

fn cmd_enumerate(ctx: &mut Ctx, a: EnumerateArgs) -> Result<(), Failure> {
    let s = &mut ctx.settings;
    let max_len: usize = s.required("max_len", a.max_len)?;
    let max_steps: u64 = s.required("max_steps", a.max_steps)?;
    let resume = s.opt("resume", a.resume.map(|p| p.display().to_string()))?;
    let defaults = EnumerateLimits::default();
    let len_cap = s.or("len_cap", a.len_cap, defaults.len_cap)?;
    let steps_cap = s.or("steps_cap", a.steps_cap, defaults.steps_cap)?;
    let max_mem = max_mem()?;
    if let Some(m) = max_mem {
        s.record("max_mem", m);
    }
    let limits = EnumerateLimits { len_cap, steps_cap, max_mem };
    let table = match resume {
        Some(path) => enumerate_resume(&load_table(Path::new(&path))?, max_len, max_steps, &limits)?,
        None => enumerate(max_len, max_steps, &limits)?,
    };
    ctx.write("table.json", &(table.to_json() + "\n"))?;
    ctx.write("summary.json", &json(&summarize(&table)))
}

fn universal(ctx: &mut Ctx, a: UniversalArgs) -> Result<(UniversalApprox, ComplexityTable, Vec<BitString>), Failure> {
    let s = &mut ctx.settings;
    let kind: String = s.required("kind", a.kind)?;
    let dim: usize = s.required("dim", a.dim)?;
    let table_path: String = s.required("table", a.table.map(|p| p.display().to_string()))?;
    let support_len: usize = s.required("support_len", a.support_len)?;
    let gh = s.opt("gh", a.gh.map(|p| p.display().to_string()))?;
    if support_len > MAX_SUPPORT_LEN {
        return Err(Failure::Usage(format!("--support-len is capped at {MAX_SUPPORT_LEN}")));
    }
    if dim == 0 {
        return Err(Failure::Usage("--dim must be positive".into()));
    }
    let table = load_table(Path::new(&table_path))?;
    let stage = s.or("stage", a.stage, table.max_len() as u64)?;
    let m = ScalarStageEnumerator::from_table(&table);
    let u = match (kind.as_str(), gh) {
        ("scalar", None) => UniversalApprox::scalar(m, dim, stage)?,
        ("scalar", Some(_)) => return Err(Failure::Usage("--gh only applies to the noncommuting kind".into())),
        ("noncommuting", None) => UniversalApprox::noncommuting_default(m, dim, stage)?,
        ("noncommuting", Some(path)) => {
            #[derive(Deserialize)]
            struct Pair {
                g: HermitianMatrix,
                h: HermitianMatrix,
            }
            let p: Pair = serde_json::from_str(&read(Path::new(&path))?)
                .map_err(|e| Failure::Validation(format!("{path}: {e}")))?;
            if p.g.dim() != dim {
                return Err(Failure::Validation(format!("G has dimension {}, expected {dim}", p.g.dim())));
            }
            UniversalApprox::noncommuting(m, p.g, p.h, stage)?
        }
        (other, _) => return Err(Failure::Usage(format!("unknown --kind {other:?}; use scalar or noncommuting"))),
    };
    let support = BitString::up_to_len(support_len).collect();
    Ok((u, table, support))
}

#[derive(Serialize)]
struct ConstructionInfo<'a> {
    #[serde(flatten)]
    kind: &'a UniversalKind,
    dim: usize,
    stage: u64,
    support: usize,
    c1: String,
    c2: String,
}

fn cmd_construct(ctx: &mut Ctx, a: ConstructArgs) -> Result<(), Failure> {
    let (u, _table, support) = universal(ctx, a.universal)?;
    let s = &mut ctx.settings;
    let seq_n = s.opt("seq_n", a.seq_n)?;
    let budget = s.or("budget", a.budget, 400u64)?;
    let drop_zero = s.flag("drop_zero", a.drop_zero)?;
    let stage = u.limit_stage();

    let info = ConstructionInfo {
        kind: u.kind(),
        dim: u.dim(),
        stage,
        support: support.len(),
        c1: format_rational(&u.c1()),
        c2: format_rational(&u.c2()),
    };
    ctx.write("construction.json", &json(&info))?;

    let m_stage = u.operator_map(&support, stage);
    validate(&m_stage)?;
    ctx.write("m_stage.json", &(m_stage.to_json() + "\n"))?;

    let mut csv = String::from("s,m\n");
    for s in &support {
        writeln!(csv, "{},{}", s.as_str(), format_rational(&u.m_value(s, stage))).unwrap();
    }
    ctx.write("semimeasure.csv", &csv)?;

    let mut csv = String::from("s,lo,hi\n");
    for (s, iv) in flatten(&m_stage, ctx.precision)? {
        writeln!(csv, "{},{},{}", s.as_str(), format_rational(iv.lo()), format_rational(iv.hi())).unwrap();
    }
    ctx.write("flatten.csv", &csv)?;

    let completed = complete_to_povm(&m_stage, !drop_zero)?;
    if !validate(&completed)?.is_povm {
        return Err(Failure::Validation("completion does not sum to the identity".into()));
    }
    ctx.write("completed.json", &(completed.to_json() + "\n"))?;

    if let Some(n) = seq_n {
        let seq = ApproxSequence::new(&u, budget)?;
        let labels = BitString::first(n);
        let f = seq.f_n(n, &labels)?;
        let g = povm_sequence(&f, n)?;
        if !validate(&g)?.is_povm {
            return Err(Failure::Validation(format!("G_{n} does not sum to the identity")));
        }
        let bounds: BTreeMap<&str, String> =
            labels.iter().map(|s| (s.as_str(), format_rational(&u.m_value(s, stage)))).collect();
        ctx.write("f_n.json", &(f.to_json() + "\n"))?;
        ctx.write("g_n.json", &(g.to_json() + "\n"))?;
        ctx.write("bounds.json", &json(&bounds))?;
    }
    Ok(())
}

fn load_bounds(path: &Path) -> Result<BTreeMap<BitString, BigRational>, Failure> {
    let raw: BTreeMap<String, String> =
        serde_json::from_str(&read(path)?).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    raw.into_iter()
        .map(|(k, v)| {
            let s = BitString::new(&k)?;
            let q = parse_rational(&v)?;
            Ok((s, q))
        })
        .collect::<semipovm::Result<_>>()
        .map_err(Failure::from)
}

fn random_states(seed: u64, dim: usize, count: usize) -> Vec<DensityMatrix> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count).map(|_| DensityMatrix::new(random_density(&mut rng, dim)).expect("random density is valid")).collect()
}

fn cmd_verify(ctx: &mut Ctx, a: VerifyArgs) -> Result<(), Failure> {
    let s = &mut ctx.settings;
    let povm_path: String = s.required("povm", a.povm.map(|p| p.display().to_string()))?;
    let rho_spec: String = s.required("rho", a.rho)?;
    let table_path: String = s.required("table", a.table.map(|p| p.display().to_string()))?;
    let bounds_path = s.opt("bounds", a.bounds.map(|p| p.display().to_string()))?;
    let random_rho = s.or("random_rho", a.random_rho, 0usize)?;
    let seed = ctx.seed;

    let q = load_povm(Path::new(&povm_path))?;
    if !validate(&q)?.is_povm {
        return Err(Failure::Validation("input is a semi-POVM, not a POVM: elements sum strictly below I".into()));
    }
    let rho = load_rho(&rho_spec, q.dim())?;
    let table = load_table(Path::new(&table_path))?;
    let bounds = bounds_path.map(|p| load_bounds(Path::new(&p))).transpose()?;

    let report = verify_main_bounds(&rho, &q, &table, bounds.as_ref())?;
    ctx.write("bound_report.json", &json(&report))?;
    ctx.write("bound_report.csv", &report.to_csv())?;
    let mut failures: Vec<String> = report.failures.clone();

    if random_rho > 0 {
        #[derive(Serialize)]
        struct StateRow {
            state: usize,
            status: &'static str,
            d_observed: Option<i64>,
            c_observed: Option<String>,
            failures: Vec<String>,
        }
        let mut rows = Vec::new();
        let mut csv = String::from("state,status,d_observed,c_observed\n");
        for (i, r) in random_states(seed, q.dim(), random_rho).iter().enumerate() {
            let rep = verify_main_bounds(r, &q, &table, bounds.as_ref())?;
            let c = rep.c_observed.as_ref().map(format_rational);
            writeln!(
                csv,
                "{i},{},{},{}",
                rep.status,
                rep.d_observed.map(|d| d.to_string()).unwrap_or_default(),
                c.clone().unwrap_or_default()
            )
            .unwrap();
            failures.extend(rep.failures.iter().map(|f| format!("state {i}: {f}")));
            rows.push(StateRow { state: i, status: rep.status, d_observed: rep.d_observed, c_observed: c, failures: rep.failures });
        }
        ctx.write("random_states.json", &json(&rows))?;
        ctx.write("random_states.csv", &csv)?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("{} bound assertion(s) failed; first: {}", failures.len(), failures[0])))
    }
}

fn cmd_sample(ctx: &mut Ctx, a: SampleArgs) -> Result<(), Failure> {
    let s = &mut ctx.settings;
    let povm_path: String = s.required("povm", a.povm.map(|p| p.display().to_string()))?;
    let rho_spec: String = s.required("rho", a.rho)?;
    let trials: u64 = s.required("trials", a.trials)?;
    let q = load_povm(Path::new(&povm_path))?;
    let rho = load_rho(&rho_spec, q.dim())?;
    let counts = sample_outcomes(&rho, &q, trials, ctx.seed)?;
    let mut csv = String::from("s,count,probability\n");
    for (label, p) in &counts.probabilities {
        writeln!(csv, "{},{},{}", label.as_str(), counts.counts.get(label).unwrap_or(&0), p).unwrap();
    }
    ctx.write("counts.json", &json(&counts))?;
    ctx.write("counts.csv", &csv)
}

fn cmd_report_ait(ctx: &mut Ctx, a: AitArgs) -> Result<(), Failure> {
    let s = &mut ctx.settings;
    let table_path: String = s.required("table", a.table.map(|p| p.display().to_string()))?;
    let max_len = s.or("max_len", a.max_len, 3usize)?;
    if max_len > 8 {
        return Err(Failure::Usage("--max-len is capped at 8 for the identity report".into()));
    }
    let t = AitTable::new(load_table(Path::new(&table_path))?);
    let sample: Vec<BitString> = BitString::up_to_len(max_len).collect();
    let report = ait_identity_report(&t, &sample);
    ctx.write("ait_identity.json", &json(&report))?;
    ctx.write("ait_identity.csv", &report.to_csv())
}

fn cmd_report_optimality(ctx: &mut Ctx, a: OptimalityArgs) -> Result<(), Failure> {
    let (u, table, support) = universal(ctx, a.universal)?;
    let s = &mut ctx.settings;
    let rho_spec = s.or("rho", a.rho, "maximally-mixed".to_string())?;
    let random_rho = s.or("random_rho", a.random_rho, 0usize)?;
    let (k, stage) = (ctx.precision, u.limit_stage());

    let mut states = vec![(rho_spec.clone(), load_rho(&rho_spec, u.dim())?)];
    for (i, r) in random_states(ctx.seed, u.dim(), random_rho).into_iter().enumerate() {
        states.push((format!("random-{i}"), r));
    }

    #[derive(Serialize)]
    struct StateReport {
        state: String,
        report: semipovm::measure::OptimalityReport,
    }
    let mut reports = Vec::new();
    let mut csv = String::from("state,s,m,prob,lower_ok,upper_ok,k_upper,k_gap_lo,k_gap_hi\n");
    let mut failures = Vec::new();
    for (name, rho) in states {
        let rep = verify_optimality(&rho, &u, &support, stage, Some(&table), k)?;
        for r in &rep.rows {
            let (lo, hi) = r.k_gap.as_ref().map_or((String::new(), String::new()), |g| {
                (format_rational(g.lo()), format_rational(g.hi()))
            });
            writeln!(
                csv,
                "{name},{},{},{},{},{},{},{lo},{hi}",
                r.s.as_str(),
                format_rational(&r.m),
                format_rational(&r.prob),
                r.lower_ok,
                r.upper_ok,
                r.k_upper.map(|k| k.to_string()).unwrap_or_default()
            )
            .unwrap();
        }
        failures.extend(rep.failures.iter().map(|f| format!("{name}: {f}")));
        reports.push(StateReport { state: name, report: rep });
    }
    let status = if failures.is_empty() { "pass" } else { "fail" };
    ctx.write("optimality.json", &json(&serde_json::json!({ "status": status, "states": reports })))?;
    ctx.write("optimality.csv", &csv)?;

    let mut mk = Vec::new();
    for s in &support {
        if is_positive_definite(&u.element(s, stage)) {
            mk.push(matrix_k(&u, s, stage, k, Some(&table))?);
        }
    }
    ctx.write("matrix_k.json", &json(&mk))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("{} sandwich violation(s); first: {}", failures.len(), failures[0])))
    }
}

fn cmd_report_density(ctx: &mut Ctx, a: DensityArgs) -> Result<(), Failure> {
    let s = &mut ctx.settings;
    let table_path: String = s.required("table", a.table.map(|p| p.display().to_string()))?;
    let dim = s.or("dim", a.dim, 8usize)?;
    let eps_text = s.or("eps", a.eps, "1/4".to_string())?;
    let budget = s.or("search_budget", a.search_budget, 10_000u64)?;
    let eps = parse_rational(&eps_text).map_err(|e| Failure::Usage(format!("--eps: {e}")))?;
    if dim == 0 {
        return Err(Failure::Usage("--dim must be positive".into()));
    }
    let table = load_table(Path::new(&table_path))?;
    let m = ScalarStageEnumerator::from_table(&table);
    let stage = table.max_len() as u64;
    let sigmas = (1..=dim).map(|n| semi_density_sigma(&m, n, stage)).collect::<semipovm::Result<Vec<_>>>()?;
    let family = |n: usize, k: u64| (1..=n as u64).map(|i| m.value(k, &phi_inv_u64(i))).collect::<Vec<_>>();
    let search = trace_deficiency_search(family, &eps, budget, 1..=dim);
    let traces: Vec<String> = sigmas.iter().map(|x| format_rational(&x.trace())).collect();
    let report = serde_json::json!({
        "kraft_sum": format_rational(&table.kraft_sum()),
        "stage": stage,
        "traces": traces,
        "sigma": sigmas,
        "search": search,
    });
    ctx.write("density.json", &json(&report))
}
