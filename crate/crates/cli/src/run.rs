use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};
use tensorspec::decomp::DEFAULT_RANK_TOL;
use tensorspec::io::{read_tensor, CpFile, TensorFile, TuckerFile};
use tensorspec::{
    contract_pairs, cp_als, find_eigenpairs, find_singular_tuples, hosvd, multilinear_rank,
    odeco_decompose, relative_error, trace_pair, tucker_eval, AlsOptions, DenseTensor,
    EigenOptions, EigenVariant, OdecoOptions, OdecoStatus, SingularOptions, TensorError,
};

use crate::args::{Cli, Command, Format, Opts, VariantArg};
use crate::output::{fmt, fmt_vec, round_json, table};

pub const EXIT_PARSE: u8 = 2;
pub const EXIT_UNCONVERGED: u8 = 3;
pub const EXIT_FLAGS: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Input { path: String, source: TensorError },
    #[error("{0}")]
    Flags(String),
    #[error(transparent)]
    Compute(TensorError),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input { .. } => EXIT_PARSE,
            CliError::Flags(_) | CliError::Compute(_) => EXIT_FLAGS,
            CliError::Output(_) => 1,
        }
    }
}

impl From<TensorError> for CliError {
    fn from(e: TensorError) -> Self {
        CliError::Compute(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// One subcommand's result: the JSON document, its table rendering and
/// whether every solver run converged.
struct Report {
    json: Value,
    table: String,
    converged: bool,
}

fn load(path: &Path) -> Result<DenseTensor> {
    read_tensor(path).map_err(|source| CliError::Input {
        path: path.display().to_string(),
        source,
    })
}

fn check_flags(cmd: &Command, opts: &Opts) -> Result<()> {
    let accepted = cmd.accepted();
    let bad: Vec<String> = opts
        .given()
        .into_iter()
        .filter(|f| !accepted.contains(f))
        .map(|f| format!("--{f}"))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Flags(format!(
            "{} does not apply to `{}`",
            bad.join(", "),
            cmd.name()
        )))
    }
}

fn positive(name: &str, v: Option<f64>) -> Result<Option<f64>> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => {
            Err(CliError::Flags(format!("--{name} must be positive, got {x}")))
        }
        _ => Ok(v),
    }
}

pub fn run(cli: &Cli) -> Result<u8> {
    let opts = &cli.opts;
    check_flags(&cli.command, opts)?;
    positive("tol", opts.tol)?;
    if opts.starts == Some(0) || opts.max_iters == Some(0) {
        return Err(CliError::Flags("--starts and --max-iters must be at least 1".into()));
    }
    let report = match &cli.command {
        Command::Info { input } => info(&load(input)?, opts)?,
        Command::Contract { args } => contract(args)?,
        Command::Eig { input } => eig(&load(input)?, opts)?,
        Command::Svd { input } => svd(&load(input)?, opts)?,
        Command::Cp { input } => cp(&load(input)?, opts)?,
        Command::Tucker { input } => tucker(&load(input)?, opts)?,
        Command::Hosvd { input } => hosvd_exact(&load(input)?, opts)?,
        Command::Odeco { input } => odeco(&load(input)?, opts)?,
        Command::Mlrank { input } => mlrank(&load(input)?, opts)?,
    };
    let text = match opts.format {
        Format::Json => {
            let mut v = report.json;
            round_json(&mut v);
            v.to_string() + "\n"
        }
        Format::Table => report.table,
    };
    match &opts.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    if report.converged {
        Ok(0)
    } else {
        eprintln!("warning: solver did not converge; partial results emitted");
        Ok(EXIT_UNCONVERGED)
    }
}

fn tensor_table(t: &DenseTensor) -> String {
    let rows: Vec<Vec<String>> = t
        .shape()
        .iter()
        .zip(t.data())
        .map(|(m, &v)| vec![format!("{:?}", m.as_slice()), fmt(v)])
        .collect();
    format!("shape {:?}\n", t.dims()) + &table(&["index", "value"], &rows)
}

fn info(t: &DenseTensor, opts: &Opts) -> Result<Report> {
    let scale = t.data().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let symmetric = t.shape().is_scalar() || (t.is_cubical() && t.is_symmetric(1e-12 * scale)?);
    let norm = t.frobenius_norm();
    let ranks = multilinear_rank(t, opts.tol.unwrap_or(DEFAULT_RANK_TOL))?;
    let json = json!({
        "order": t.order(),
        "shape": t.dims(),
        "symmetric": symmetric,
        "frobenius_norm": norm,
        "multilinear_rank": ranks,
    });
    let table = format!(
        "order             {}\nshape             {:?}\nsymmetric         {}\nfrobenius norm    {}\nmultilinear rank  {:?}\n",
        t.order(),
        t.dims(),
        symmetric,
        fmt(norm),
        ranks
    );
    Ok(Report { json, table, converged: true })
}

fn parse_pair(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once(':')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn contract(args: &[String]) -> Result<Report> {
    let mut files = Vec::new();
    let mut pairs = Vec::new();
    for a in args {
        match parse_pair(a) {
            Some(p) => pairs.push(p),
            None => files.push(a),
        }
    }
    let result = match files.as_slice() {
        [a] => {
            if pairs.is_empty() {
                return Err(CliError::Flags("one tensor needs at least one mode pair a:b".into()));
            }
            let mut t = load(Path::new(a))?;
            // original mode numbers shift down as pairs are traced out
            let mut pos: Vec<Option<usize>> = (1..=t.order()).map(Some).collect();
            for (x, y) in pairs {
                let lookup = |m: usize| pos.get(m.wrapping_sub(1)).copied().flatten();
                let (Some(px), Some(py)) = (lookup(x), lookup(y)) else {
                    return Err(CliError::Flags(format!("mode pair {x}:{y} is invalid or already used")));
                };
                t = trace_pair(&t, px, py)?;
                for p in pos.iter_mut() {
                    *p = p.and_then(|v| {
                        (v != px && v != py).then(|| v - usize::from(v > px) - usize::from(v > py))
                    });
                }
            }
            t
        }
        [a, b] => {
            let (ta, tb) = (load(Path::new(a))?, load(Path::new(b))?);
            if pairs.is_empty() {
                pairs.push((ta.order(), 1));
            }
            contract_pairs(&ta, &tb, &pairs)?
        }
        _ => return Err(CliError::Flags("contract takes one or two tensor files".into())),
    };
    Ok(Report {
        json: serde_json::to_value(TensorFile::from(&result)).expect("tensor serializes"),
        table: tensor_table(&result),
        converged: true,
    })
}

fn eig(t: &DenseTensor, opts: &Opts) -> Result<Report> {
    let variant = match opts.variant.unwrap_or(VariantArg::Z) {
        VariantArg::Z => EigenVariant::Z,
        VariantArg::H => EigenVariant::H,
    };
    let mode = opts.mode.unwrap_or(1);
    if mode == 0 || mode > t.order() {
        return Err(CliError::Flags(format!(
            "--mode {mode} out of range for a tensor of order {}",
            t.order()
        )));
    }
    let mut o = EigenOptions {
        seed: opts.seed.unwrap_or(0),
        threads: opts.threads(),
        ..EigenOptions::default()
    };
    o.tol = opts.tol.unwrap_or(o.tol);
    o.max_iters = opts.max_iters.unwrap_or(o.max_iters);
    o.starts = opts.starts.unwrap_or(o.starts);
    let found = find_eigenpairs(t, mode, variant, &o)?;
    let converged = found.converged();
    let mut json = serde_json::to_value(&found).expect("eigen search serializes");
    json["converged"] = converged.into();
    let rows: Vec<Vec<String>> = found
        .pairs
        .iter()
        .map(|p| vec![fmt(p.lambda), fmt_vec(&p.x), format!("{:.1e}", p.residual)])
        .collect();
    let mut table = format!("{variant}-eigenpairs, mode {mode}\n")
        + &table(&["lambda", "x", "residual"], &rows);
    if found.continuum {
        table.push_str("every unit vector is an eigenvector; coordinate vectors listed\n");
    }
    Ok(Report { json, table, converged })
}

fn svd(t: &DenseTensor, opts: &Opts) -> Result<Report> {
    let p = match opts.p.as_deref().map(str::trim) {
        None => 2,
        Some("O" | "o") => t.order(),
        Some(s) => s
            .parse::<usize>()
            .map_err(|_| CliError::Flags(format!("--p must be 2 or O, got {s:?}")))?,
    };
    if p != 2 && p != t.order() {
        return Err(CliError::Flags(format!(
            "--p must be 2 or the order {}, got {p}",
            t.order()
        )));
    }
    let mut o = SingularOptions {
        seed: opts.seed.unwrap_or(0),
        threads: opts.threads(),
        ..SingularOptions::default()
    };
    o.tol = opts.tol.unwrap_or(o.tol);
    o.max_iters = opts.max_iters.unwrap_or(o.max_iters);
    o.starts = opts.starts.unwrap_or(o.starts);
    let found = find_singular_tuples(t, p, &o)?;
    let converged = found.converged();
    let mut json = serde_json::to_value(&found).expect("singular search serializes");
    json["converged"] = converged.into();
    let rows: Vec<Vec<String>> = found
        .tuples
        .iter()
        .map(|u| {
            let vs: Vec<String> = u.xs.iter().map(|x| fmt_vec(x)).collect();
            vec![fmt(u.sigma), vs.join(" "), format!("{:.1e}", u.residual)]
        })
        .collect();
    let table = format!("l{p} singular tuples\n") + &table(&["sigma", "vectors", "residual"], &rows);
    Ok(Report { json, table, converged })
}

fn cp(t: &DenseTensor, opts: &Opts) -> Result<Report> {
    let rank = opts
        .rank
        .ok_or_else(|| CliError::Flags("cp needs --rank".into()))?;
    let mut o = AlsOptions {
        seed: opts.seed.unwrap_or(0),
        threads: opts.threads(),
        ..AlsOptions::default()
    };
    o.tol = opts.tol.unwrap_or(o.tol);
    o.max_iters = opts.max_iters.unwrap_or(o.max_iters);
    o.starts = opts.starts.unwrap_or(o.starts);
    let rep = cp_als(t, rank, &o)?;
    let json = json!({
        "cp": CpFile::from(&rep.cp),
        "rel_error": rep.rel_error,
        "sweeps": rep.sweeps,
        "converged": rep.converged,
        "start": rep.start,
    });
    let rows: Vec<Vec<String>> = (0..rep.cp.rank())
        .map(|r| {
            let vs: Vec<String> = rep.cp.term_vectors(r).iter().map(|v| fmt_vec(v)).collect();
            vec![fmt(rep.cp.weights()[r]), vs.join(" ")]
        })
        .collect();
    let table = format!(
        "rank {rank}, relative error {}, {} sweeps\n",
        fmt(rep.rel_error),
        rep.sweeps
    ) + &table(&["weight", "factors"], &rows);
    Ok(Report { json, table, converged: rep.converged })
}

fn tucker_report(t: &DenseTensor, ranks: &[usize]) -> Result<Report> {
    let tk = hosvd(t, ranks)?;
    let err = relative_error(t, &tucker_eval(&tk)?)?;
    let json = json!({"tucker": TuckerFile::from(&tk), "rel_error": err});
    let table = format!("ranks {ranks:?}, relative error {}\ncore ", fmt(err)) + &tensor_table(tk.core());
    Ok(Report { json, table, converged: true })
}

fn tucker(t: &DenseTensor, opts: &Opts) -> Result<Report> {
    let ranks = opts
        .ranks
        .as_deref()
        .ok_or_else(|| CliError::Flags("tucker needs --ranks a,b,...".into()))?;
    if ranks.len() != t.order() || ranks.iter().zip(t.dims()).any(|(&r, &m)| r == 0 || r > m) {
        return Err(CliError::Flags(format!(
            "--ranks {ranks:?} do not fit shape {:?}",
            t.dims()
        )));
    }
    tucker_report(t, ranks)
}

fn hosvd_exact(t: &DenseTensor, opts: &Opts) -> Result<Report> {
    // a zero tensor still gets a 1 x ... x 1 core
    let ranks: Vec<usize> = multilinear_rank(t, opts.tol.unwrap_or(DEFAULT_RANK_TOL))?
        .into_iter()
        .map(|r| r.max(1))
        .collect();
    tucker_report(t, &ranks)
}

fn odeco(t: &DenseTensor, opts: &Opts) -> Result<Report> {
    let mut o = OdecoOptions {
        symmetric: t.is_cubical() && t.is_symmetric(1e-12)?,
        seed: opts.seed.unwrap_or(0),
        ..OdecoOptions::default()
    };
    o.tol = opts.tol.unwrap_or(o.tol);
    o.max_iters = opts.max_iters.unwrap_or(o.max_iters);
    o.starts = opts.starts.unwrap_or(o.starts);
    let rep = odeco_decompose(t, &o)?;
    let status = match &rep.status {
        OdecoStatus::Ok => json!("ok"),
        OdecoStatus::NotConverged => json!("not_converged"),
        OdecoStatus::NotOrthogonal { max_deviation } => {
            json!({"not_orthogonal": {"max_deviation": max_deviation}})
        }
    };
    let ok = rep.status == OdecoStatus::Ok;
    let json = json!({
        "cp": CpFile::from(&rep.cp),
        "status": status,
        "remainder_norms": rep.remainder_norms,
        "reconstruction_error": rep.reconstruction_error,
        "converged": ok,
    });
    let rows: Vec<Vec<String>> = (0..rep.cp.rank())
        .map(|r| {
            let vs: Vec<String> = rep.cp.term_vectors(r).iter().map(|v| fmt_vec(v)).collect();
            vec![fmt(rep.cp.weights()[r]), vs.join(" ")]
        })
        .collect();
    let table = format!(
        "status {:?}, reconstruction error {}\n",
        rep.status,
        fmt(rep.reconstruction_error)
    ) + &table(&["weight", "vectors"], &rows);
    Ok(Report { json, table, converged: ok })
}

fn mlrank(t: &DenseTensor, opts: &Opts) -> Result<Report> {
    let ranks = multilinear_rank(t, opts.tol.unwrap_or(DEFAULT_RANK_TOL))?;
    let table = format!("multilinear rank {ranks:?}\n");
    Ok(Report {
        json: json!({ "multilinear_rank": ranks }),
        table,
        converged: true,
    })
}
