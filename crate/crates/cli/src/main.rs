use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use permclust::cluster::{exact_moments, tally_patterns};
use permclust::enumerate::{enumerate_class, CountTable};
use permclust::formulas::{
    asymptotic_constants, expectation, expectation_total, AsymptoticKind, Branch,
};
use permclust::perm::{find_blocks, is_simple};
use permclust::rational::{ratio, to_f64, to_string};
use permclust::sampler::{monte_carlo, sample_many, Method, SamplerConfig, DEFAULT_WORKERS};
use permclust::series::{verify_identities, verify_identities_for};
use permclust::{AvoidanceClass, Error, Permutation, DEFAULT_ENUM_CAP};
use serde_json::{json, Value};

/// Exact cluster statistics for pattern-avoiding permutations.
#[derive(Parser)]
#[command(name = "permclust", version)]
struct Cli {
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include float renderings next to exact values.
    #[arg(long, global = true)]
    float: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Class sizes |S_n^{av(c)}|.
    Count {
        #[arg(long)]
        class: AvoidanceClass,
        /// Single length, or the upper end of a range with --from.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        from: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// List the members of a class, one per line.
    Enumerate {
        #[arg(long)]
        class: AvoidanceClass,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Brute-force moments of a cluster count.
    Stats {
        #[arg(long)]
        class: AvoidanceClass,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        tau: Option<Permutation>,
        /// Per-pattern means instead of one moment report.
        #[arg(long)]
        by_pattern: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Closed-form expectation of a cluster count.
    Formula {
        /// Single forbidden pattern of length three.
        #[arg(long, conflicts_with = "class", required_unless_present = "class")]
        eta: Option<Permutation>,
        /// Class of simple patterns, e.g. 2413+3142.
        #[arg(long)]
        class: Option<AvoidanceClass>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Pattern of the clusters; omitted means all clusters.
        #[arg(long)]
        tau: Option<Permutation>,
    },
    /// Compare every closed form with brute force.
    Verify {
        #[arg(long, default_value_t = 8)]
        max_n: usize,
        #[arg(long, default_value_t = 4)]
        max_k: usize,
        /// Extra classes of simple patterns to include.
        #[arg(long = "simple-class", default_values_t = vec!["2413+3142".parse::<AvoidanceClass>().unwrap()])]
        simple_classes: Vec<AvoidanceClass>,
    },
    /// Draw uniform members of a class.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        class: AvoidanceClass,
        #[arg(long)]
        method: Option<Method>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Monte-Carlo estimate of a cluster count.
    Mc {
        #[command(flatten)]
        run: McArgs,
    },
    /// Check the generating-function identities coefficient by coefficient.
    SeriesCheck {
        #[arg(long, default_value_t = 40)]
        truncation: usize,
        /// Restrict to one cluster length.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Limit constants with exact finite-n values.
    Asymptotics {
        #[arg(long)]
        kind: AsymptoticKind,
        #[arg(long)]
        k: usize,
        /// Comma-separated lengths.
        #[arg(long, value_delimiter = ',', default_values_t = vec![10, 20, 40, 80])]
        ns: Vec<usize>,
        /// Class of simple patterns, for sw_general only.
        #[arg(long)]
        class: Option<AvoidanceClass>,
    },
    /// Report blocks and simplicity of patterns.
    SimpleCheck {
        /// Patterns joined by '+'.
        #[arg(long)]
        patterns: String,
    },
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    class: AvoidanceClass,
    #[arg(long)]
    tau: Option<Permutation>,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_WORKERS)]
    workers: usize,
    #[arg(long)]
    method: Option<Method>,
}

enum Failure {
    Lib(Error),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<String, Failure>;

fn enum_cap() -> Result<u64, Error> {
    match std::env::var("PERMCLUST_ENUM_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("PERMCLUST_ENUM_CAP='{v}' is not an integer"))),
        Err(_) => Ok(DEFAULT_ENUM_CAP),
    }
}

/// Drops float-valued fields unless floats were asked for.
fn strip_floats(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.retain(|_, x| !x.is_f64());
            map.values_mut().for_each(strip_floats);
        }
        Value::Array(xs) => xs.iter_mut().for_each(strip_floats),
        _ => {}
    }
}

fn emit_json(mut v: Value, float: bool) -> String {
    if !float {
        strip_floats(&mut v);
    }
    serde_json::to_string_pretty(&v).expect("json values always serialize") + "\n"
}

fn with_ref(v: impl serde::Serialize, reference: &str) -> Value {
    let mut v = serde_json::to_value(v).expect("report types always serialize");
    if let Value::Object(map) = &mut v {
        map.insert("paper_ref".into(), Value::String(reference.into()));
    }
    v
}

fn formula_ref(class: &AvoidanceClass, branch: Option<Branch>) -> String {
    match branch {
        Some(b) => format!("cluster-mean:av({class}):{b}"),
        None => format!("cluster-mean-total:av({class})"),
    }
}

fn count(class: &AvoidanceClass, n: usize, from: Option<usize>, format: Format, cap: u64) -> Outcome {
    let lo = from.unwrap_or(n);
    if lo > n {
        return Err(Error::InvalidInput(format!("--from {lo} exceeds --n {n}")).into());
    }
    let table = CountTable::compute(class, lo..=n, cap)?;
    Ok(match format {
        Format::Csv => table.to_csv(),
        Format::Table => table.counts.iter().map(|(n, c)| format!("{n}\t{c}\n")).collect(),
        Format::Json => emit_json(with_ref(&table, "class-size:enumeration"), false),
    })
}

fn enumerate(class: &AvoidanceClass, n: usize, limit: Option<usize>, format: Format, cap: u64) -> Outcome {
    let take = limit.unwrap_or(usize::MAX);
    let mut perms = Vec::new();
    for p in enumerate_class(n, class).take(take) {
        if perms.len() as u64 >= cap {
            return Err(Error::ResourceLimit { what: format!("enumerating {class} at n={n}"), cap }.into());
        }
        perms.push(p.to_string());
    }
    Ok(match format {
        Format::Json => emit_json(json!({ "class": class, "n": n, "members": perms }), false),
        Format::Csv => std::iter::once("permutation\n".to_string()).chain(perms.iter().map(|p| format!("{p}\n"))).collect(),
        Format::Table => perms.iter().map(|p| format!("{p}\n")).collect(),
    })
}

#[allow(clippy::too_many_arguments)]
fn stats(
    class: &AvoidanceClass,
    n: usize,
    k: usize,
    tau: Option<&Permutation>,
    by_pattern: bool,
    format: Format,
    float: bool,
    cap: u64,
) -> Outcome {
    if !by_pattern {
        let m = exact_moments(n, k, tau, class, cap)?;
        let mut v = with_ref(&m, "cluster-moments:enumeration");
        if float {
            v["mean_float"] = json!(to_f64(&m.mean));
            v["variance_float"] = json!(to_f64(&m.variance));
        }
        return Ok(emit_json(v, float));
    }
    if n < k || k < 2 {
        return Err(Error::InvalidInput(format!("need 2 <= k <= n, got n={n}, k={k}")).into());
    }
    let tally = tally_patterns(n, k, class, cap)?;
    let rows: Vec<(String, String, f64)> = tally
        .per_pattern
        .keys()
        .map(|t| {
            let m = tally.mean(t);
            (t.to_string(), to_string(&m), to_f64(&m))
        })
        .collect();
    Ok(match format {
        Format::Json => {
            let per: Vec<Value> = rows
                .iter()
                .map(|(t, m, f)| json!({ "tau": t, "mean": m, "mean_float": f }))
                .collect();
            let v = json!({
                "n": n, "k": k, "class": class,
                "class_size": tally.class_size.to_string(),
                "total_mean": to_string(&tally.total_mean()),
                "per_pattern": per,
                "paper_ref": "cluster-mean-by-pattern:enumeration",
            });
            emit_json(v, float)
        }
        Format::Csv | Format::Table => {
            let sep = if format == Format::Csv { "," } else { "\t" };
            let mut out = if float { format!("tau{sep}mean{sep}mean_float\n") } else { format!("tau{sep}mean\n") };
            for (t, m, f) in &rows {
                if float {
                    out.push_str(&format!("{t}{sep}{m}{sep}{f}\n"));
                } else {
                    out.push_str(&format!("{t}{sep}{m}\n"));
                }
            }
            out
        }
    })
}

fn formula(
    eta: Option<Permutation>,
    class: Option<AvoidanceClass>,
    n: usize,
    k: usize,
    tau: Option<&Permutation>,
    float: bool,
    cap: u64,
) -> Outcome {
    let class = match (eta, class) {
        (Some(e), None) => {
            if e.len() != 3 {
                return Err(Error::InvalidInput(format!("--eta {e} must have length 3")).into());
            }
            AvoidanceClass::single(e)?
        }
        (None, Some(c)) => c,
        _ => return Err(Error::InvalidInput("give exactly one of --eta and --class".into()).into()),
    };
    let mut v = match tau {
        Some(t) => {
            let e = expectation(n, k, t, &class, cap)?;
            let mut v = json!({
                "n": n, "k": k, "tau": t, "class": class,
                "exact": to_string(&e.value),
                "float": to_f64(&e.value),
                "branch": e.branch,
                "paper_ref": formula_ref(&class, Some(e.branch)),
            });
            if e.excluded() {
                v["warning"] = json!(format!("tau={t} contains a forbidden pattern; the count is identically 0"));
            }
            v
        }
        None => {
            let e = expectation_total(n, k, &class, cap)?;
            json!({
                "n": n, "k": k, "tau": Value::Null, "class": class,
                "exact": to_string(&e),
                "float": to_f64(&e),
                "branch": "total",
                "paper_ref": formula_ref(&class, None),
            })
        }
    };
    if !float {
        v.as_object_mut().unwrap().remove("float");
    }
    Ok(emit_json(v, float))
}

fn verify(max_n: usize, max_k: usize, simple: &[AvoidanceClass], cap: u64) -> Outcome {
    let mut classes: Vec<AvoidanceClass> =
        Permutation::all(3).map(AvoidanceClass::single).collect::<Result<_, _>>()?;
    classes.extend(simple.iter().cloned());
    let mut checked = 0u64;
    for class in &classes {
        for n in 2..=max_n {
            for k in 2..=max_k.min(n) {
                let tally = tally_patterns(n, k, class, cap)?;
                for tau in Permutation::all(k) {
                    let e = expectation(n, k, &tau, class, cap)?;
                    let brute = tally.mean(&tau);
                    checked += 1;
                    if e.value != brute {
                        return Err(Failure::Mismatch(format!(
                            "mismatch at n={n} k={k} tau={tau} class={class}: formula {} vs enumeration {}",
                            to_string(&e.value),
                            to_string(&brute)
                        )));
                    }
                }
                let total = expectation_total(n, k, class, cap)?;
                checked += 1;
                if total != tally.total_mean() {
                    return Err(Failure::Mismatch(format!(
                        "mismatch at n={n} k={k} tau=all class={class}: formula {} vs enumeration {}",
                        to_string(&total),
                        to_string(&tally.total_mean())
                    )));
                }
            }
        }
    }
    let names: Vec<String> = classes.iter().map(|c| c.to_string()).collect();
    Ok(emit_json(
        json!({
            "status": "ok", "max_n": max_n, "max_k": max_k, "classes": names, "checked": checked,
            "paper_ref": "cluster-mean:closed-form-vs-enumeration",
        }),
        false,
    ))
}

fn sampler_config(n: usize, class: AvoidanceClass, method: Option<Method>, seed: u64, cap: u64) -> SamplerConfig {
    let method = method.unwrap_or_else(|| SamplerConfig::default_method(&class));
    SamplerConfig::new(seed, n, class, method).with_cap(cap)
}

fn sample(n: usize, class: AvoidanceClass, method: Option<Method>, seed: u64, count: usize, cap: u64) -> Outcome {
    let cfg = sampler_config(n, class, method, seed, cap);
    Ok(sample_many(&cfg, count)?.iter().map(|p| format!("{p}\n")).collect())
}

fn mc(a: McArgs, float: bool, cap: u64) -> Outcome {
    let cfg = sampler_config(a.n, a.class.clone(), a.method, a.seed, cap).with_workers(a.workers);
    let est = monte_carlo(&cfg, a.k, a.tau.as_ref(), a.samples)?;
    let m = a.samples as u128;
    let mean = ratio(est.sum, m);
    let variance = ratio(m * est.sum_sq - est.sum * est.sum, m * (m - 1));
    let mut v = with_ref(&est, "cluster-mean:monte-carlo");
    let obj = v.as_object_mut().unwrap();
    obj.insert("n".into(), json!(a.n));
    obj.insert("k".into(), json!(a.k));
    obj.insert("tau".into(), json!(a.tau.as_ref().map(|t| t.to_string())));
    obj.insert("class".into(), json!(a.class.to_string()));
    obj.insert("method".into(), json!(cfg.method.to_string()));
    obj.insert("sum".into(), json!(est.sum.to_string()));
    obj.insert("sum_sq".into(), json!(est.sum_sq.to_string()));
    obj.insert("mean_exact".into(), json!(to_string(&mean)));
    obj.insert("variance_exact".into(), json!(to_string(&variance)));
    Ok(emit_json(v, float))
}

fn series_check(truncation: usize, k: Option<usize>, format: Format) -> Outcome {
    let ids = match k {
        Some(k) => {
            let lo = if k == 2 { 2 } else { 1 };
            verify_identities_for(k, &(lo..=k).collect::<Vec<_>>(), truncation)?
        }
        None => verify_identities(truncation),
    };
    let opt = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
    let out = match format {
        Format::Json => {
            let rows: Vec<Value> = ids
                .iter()
                .map(|id| {
                    json!({
                        "name": id.name, "k": id.k, "i_k": id.i_k, "truncation": id.truncation,
                        "holds": id.holds(), "first_mismatch": id.first_mismatch,
                    })
                })
                .collect();
            emit_json(json!({ "identities": rows, "paper_ref": "generating-function-identities" }), false)
        }
        Format::Csv | Format::Table => {
            let sep = if format == Format::Csv { "," } else { "\t" };
            let mut out = format!("name{sep}k{sep}i_k{sep}truncation{sep}result\n");
            for id in &ids {
                let result = match id.first_mismatch {
                    None => "PASS".to_string(),
                    Some(i) => format!("FAIL at t^{i}"),
                };
                out.push_str(&format!(
                    "{}{sep}{}{sep}{}{sep}{}{sep}{result}\n",
                    id.name,
                    opt(id.k),
                    opt(id.i_k),
                    id.truncation
                ));
            }
            out
        }
    };
    match ids.iter().find(|id| !id.holds()) {
        Some(id) => Err(Failure::Mismatch(format!(
            "{out}identity {} (k={}, i_k={}) fails at t^{}",
            id.name,
            opt(id.k),
            opt(id.i_k),
            id.first_mismatch.unwrap_or(0)
        ))),
        None => Ok(out),
    }
}

fn asymptotics(
    kind: AsymptoticKind,
    k: usize,
    ns: &[usize],
    class: Option<&AvoidanceClass>,
    float: bool,
    cap: u64,
) -> Outcome {
    let report = asymptotic_constants(kind, k, ns, class, cap)?;
    let reference = format!("cluster-limit:{}", serde_json::to_value(kind).unwrap().as_str().unwrap_or(""));
    let mut v = with_ref(&report, &reference);
    v["constant_symbolic"] = json!(report.constant.to_string());
    if !float {
        v.as_object_mut().unwrap().remove("constant_float");
    }
    Ok(emit_json(v, float))
}

fn simple_check(patterns: &str) -> Outcome {
    let pats: Vec<Permutation> = patterns
        .split('+')
        .map(|p| p.trim().parse::<Permutation>())
        .collect::<Result<_, _>>()?;
    let rows: Vec<Value> = pats
        .iter()
        .map(|p| {
            let blocks: Vec<Value> = find_blocks(p)
                .iter()
                .map(|b| json!({ "start_pos": b.start_pos, "length": b.length }))
                .collect();
            json!({ "pattern": p, "simple": is_simple(p), "length": p.len(), "blocks": blocks })
        })
        .collect();
    let usable = pats.iter().all(|p| p.len() >= 4 && is_simple(p));
    Ok(emit_json(
        json!({
            "patterns": rows,
            "all_simple_length_ge_4": usable,
            "paper_ref": "simple-permutation:block-test",
        }),
        false,
    ))
}

fn run(cli: Cli) -> Outcome {
    let cap = enum_cap()?;
    let float = cli.float;
    match cli.command {
        Command::Count { class, n, from, format } => count(&class, n, from, format, cap),
        Command::Enumerate { class, n, limit, format } => enumerate(&class, n, limit, format, cap),
        Command::Stats { class, n, k, tau, by_pattern, format } => {
            stats(&class, n, k, tau.as_ref(), by_pattern, format, float, cap)
        }
        Command::Formula { eta, class, n, k, tau } => formula(eta, class, n, k, tau.as_ref(), float, cap),
        Command::Verify { max_n, max_k, simple_classes } => verify(max_n, max_k, &simple_classes, cap),
        Command::Sample { n, class, method, seed, count } => sample(n, class, method, seed, count, cap),
        Command::Mc { run } => mc(run, float, cap),
        Command::SeriesCheck { truncation, k, format } => series_check(truncation, k, format),
        Command::Asymptotics { kind, k, ns, class } => asymptotics(kind, k, &ns, class.as_ref(), float, cap),
        Command::SimpleCheck { patterns } => simple_check(&patterns),
    }
}

fn write_out(path: Option<&PathBuf>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out = cli.out.clone();
    match run(cli) {
        Ok(text) => match write_out(out.as_ref(), &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidInput(_) => 2,
                Error::ResourceLimit { .. } => 3,
            })
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
