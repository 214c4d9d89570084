use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use slocc_lab::avgfree::{
    best_avgfree_below, construct_avgfree, max_avgfree_bruteforce, verify_avgfree_with_budget, AvgFreeSet, Provenance,
    VERIFY_BUDGET,
};
use slocc_lab::cwprotocol::{
    expected_counts, rate_rows_csv, rate_table, realize_local_maps, run_protocol, EliminationRule, ProtocolConfig,
    DEFAULT_ENUMERATION_BUDGET,
};
use slocc_lab::degeneration::{
    border_rank_bounds, dicke_from_ghz, dicke_lambda_from_ghz, verify_degeneration, w_from_ghz, DegenerationCertificate,
};
use slocc_lab::format::{maps_from_file, maps_to_file, AnyCertificate, AnyTensor, MapSetFile, Serial};
use slocc_lab::interpolation::{compile_restriction, rank_power_bound, verify_compiled, DEFAULT_BUDGET};
use slocc_lab::report::{self, document, render};
use slocc_lab::slocc::{check_restriction, epr_chain_extract, reduce_party, schmidt_profile};
use slocc_lab::states::{make_dicke, make_dicke_lambda, make_epr_pair, make_ghz, make_w, Partition};
use slocc_lab::support::{functionals, rate_lower_bound_support, Theta};
use slocc_lab::{
    Cyclotomic, CyclotomicEmbed, CyclotomicField, Error, Field, LocalMapSet, Rational, SparseTensor,
};

const BUDGET_VAR: &str = "SLOCC_LAB_BUDGET";

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(Error::InvalidCertificate(_) | Error::SearchExhausted(_)) => 1,
            _ => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Rendered output plus whether every check in it passed.
struct Outcome {
    text: String,
    ok: bool,
}

impl Outcome {
    fn doc(command: &str, config: Value, result: Value, ok: bool) -> Self {
        Outcome { text: render(&document(command, config, result)), ok }
    }

    fn raw(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

#[derive(Parser)]
#[command(name = "slocc-lab", version, about = "Exact laboratory for asymptotic SLOCC transformations")]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Work budget for enumerations and compiled restrictions.
    #[arg(long, global = true)]
    budget: Option<u128>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct named states.
    #[command(subcommand)]
    State(StateCmd),
    /// Tensor ranks, products and local maps.
    #[command(subcommand)]
    Tensor(TensorCmd),
    /// Schmidt profiles, restriction checks and party reduction.
    #[command(subcommand)]
    Slocc(SloccCmd),
    /// Build and verify degeneration certificates.
    #[command(subcommand)]
    Degen(DegenCmd),
    /// Compile a certificate into an exact restriction from GHZ.
    Interpolate(InterpolateArgs),
    /// Support functionals and rate lower bounds.
    Support(SupportArgs),
    /// Average-free sets.
    #[command(subcommand)]
    Avgfree(AvgfreeCmd),
    /// W-to-GHZ hashing protocol.
    #[command(subcommand)]
    Cw(CwCmd),
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct StateKind {
    /// GHZ of this level.
    #[arg(long)]
    ghz: Option<usize>,
    /// W state.
    #[arg(long)]
    w: bool,
    /// Dicke state with m zeros and n ones, as "m,n".
    #[arg(long)]
    dicke: Option<String>,
    /// Multi-level Dicke state for a partition, as "2,1".
    #[arg(long)]
    lambda: Option<String>,
    /// EPR pair between two parties, as "i,j".
    #[arg(long)]
    epr: Option<String>,
}

#[derive(Subcommand)]
enum StateCmd {
    Make {
        #[command(flatten)]
        kind: StateKind,
        #[arg(long, short = 'k')]
        parties: Option<usize>,
    },
}

#[derive(Subcommand)]
enum TensorCmd {
    /// Rank of the flattening that groups the given sites.
    Rank {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Comma-separated sites.
        #[arg(long)]
        cut: String,
    },
    /// Tensor product, or a tensor power with --power.
    Product {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: Option<PathBuf>,
        #[arg(long)]
        power: Option<usize>,
    },
    /// Apply a local map set.
    Apply {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        maps: PathBuf,
    },
}

#[derive(Subcommand)]
enum SloccCmd {
    Profile {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Print a table instead of structured text.
        #[arg(long)]
        table: bool,
    },
    Check {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        maps: PathBuf,
    },
    /// Remove one party with a linear form, or extract EPR pairs with --epr.
    Reduce {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        party: Option<usize>,
        #[arg(long)]
        epr: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum DegenCmd {
    Build {
        /// W_k from GHZ_2.
        #[arg(long)]
        w: bool,
        /// Dicke state "m,n" from GHZ_{min(m,n)+1}.
        #[arg(long)]
        dicke: Option<String>,
        /// Multi-level Dicke partition "2,1".
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, short = 'k')]
        parties: Option<usize>,
    },
    /// Verify a certificate read from --input or stdin.
    Verify {
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InterpolateArgs {
    #[arg(long)]
    cert: PathBuf,
    #[arg(long, default_value_t = 1)]
    power: usize,
    /// Check the compiled maps by exact tensor equality.
    #[arg(long)]
    verify: bool,
    /// Emit the compiled local maps.
    #[arg(long)]
    emit_maps: bool,
}

#[derive(Args)]
struct SupportArgs {
    #[arg(long)]
    state: PathBuf,
    /// "u" for uniform or comma-separated weights.
    #[arg(long, default_value = "u")]
    theta: String,
    /// Target state for a rate lower bound over the θ grid.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Grid resolution for the rate bound.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Subcommand)]
enum AvgfreeCmd {
    Construct {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
    },
    Verify {
        #[arg(long)]
        m: usize,
        /// Comma-separated elements.
        #[arg(long)]
        elements: Option<String>,
        /// File with whitespace or comma-separated elements.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Largest set in [1, N] by exhaustive search.
    Max {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Best known set in [1, bound).
    Best {
        #[arg(long)]
        bound: u128,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Args, Clone)]
struct ProtocolArgs {
    #[arg(long, short = 'k', default_value_t = 3)]
    k: usize,
    #[arg(long)]
    alpha: Option<f64>,
    /// Zero the vector at the lowest other site instead of the next site.
    #[arg(long)]
    lowest_other: bool,
}

#[derive(Subcommand)]
enum CwCmd {
    Run {
        #[command(flatten)]
        common: ProtocolArgs,
        #[arg(long, short = 'n')]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Average-free set B, one element per line or comma-separated.
        #[arg(long)]
        b_file: Option<PathBuf>,
        /// Build the local maps and check the image against GHZ_N.
        #[arg(long)]
        realize: bool,
    },
    Sweep {
        #[command(flatten)]
        common: ProtocolArgs,
        /// "a..b" (inclusive), "a,b,c" or a single value.
        #[arg(long, short = 'n')]
        n: String,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
    },
}

fn read_input(path: Option<&PathBuf>) -> CliResult<String> {
    match path {
        Some(p) => Ok(std::fs::read_to_string(p)?),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn read_tensor(path: Option<&PathBuf>) -> CliResult<AnyTensor> {
    Ok(AnyTensor::parse(&read_input(path)?)?)
}

fn parse_list(s: &str) -> CliResult<Vec<usize>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| CliError::Usage(format!("not a nonnegative integer: {t:?}"))))
        .collect()
}

fn parse_pair(s: &str) -> CliResult<(usize, usize)> {
    match parse_list(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(CliError::Usage(format!("expected two comma-separated values, got {s:?}"))),
    }
}

fn parse_range(s: &str) -> CliResult<Vec<usize>> {
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| CliError::Usage(format!("bad range {s:?}")))?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| CliError::Usage(format!("bad range {s:?}")))?;
        if a > b {
            return Err(CliError::Usage(format!("empty range {s:?}")));
        }
        Ok((a..=b).collect())
    } else {
        parse_list(s)
    }
}

fn need_parties(parties: Option<usize>) -> CliResult<usize> {
    parties.ok_or_else(|| CliError::Usage("--parties is required for this state".into()))
}

fn budget(cli: Option<u128>, default: u128) -> CliResult<u128> {
    if let Some(b) = cli {
        return Ok(b);
    }
    match std::env::var(BUDGET_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{BUDGET_VAR} is not an integer: {v:?}"))),
        Err(_) => Ok(default),
    }
}

/// Both tensors over one domain: rationals if possible, else the lcm field.
enum Pair {
    Rational(SparseTensor<Rational>, SparseTensor<Rational>),
    Cyclotomic(SparseTensor<Cyclotomic>, SparseTensor<Cyclotomic>),
}

fn common_field(orders: &[u32]) -> CliResult<CyclotomicField> {
    let order = orders.iter().fold(1u32, |acc, &o| num_integer::lcm(acc, o));
    Ok(CyclotomicField::new(order)?)
}

fn unify(a: &AnyTensor, b: &AnyTensor) -> CliResult<Pair> {
    match (a, b) {
        (AnyTensor::Rational(x), AnyTensor::Rational(y)) => Ok(Pair::Rational(x.clone(), y.clone())),
        _ => {
            let f = common_field(&[a.order(), b.order()])?;
            Ok(Pair::Cyclotomic(a.to_cyclotomic(&f)?, b.to_cyclotomic(&f)?))
        }
    }
}

fn cyclotomic_maps(f: &MapSetFile, field: &CyclotomicField) -> CliResult<LocalMapSet<Cyclotomic>> {
    if f.scalar_domain == "rational" {
        let m: LocalMapSet<Rational> = maps_from_file(f)?;
        return Ok(m.map_scalars(field.clone(), |r| field.constant(r.clone())));
    }
    let m: LocalMapSet<Cyclotomic> = maps_from_file(f)?;
    let own = m.domain().order();
    if field.order() % own != 0 {
        return Err(Error::DomainMismatch(format!("maps over Q(zeta_{own}) do not embed into Q(zeta_{})", field.order())).into());
    }
    Ok(m.map_scalars(field.clone(), |c| c.embed(field).expect("order divides")))
}

fn map_order(f: &MapSetFile) -> u32 {
    f.scalar_domain.strip_prefix("cyclotomic:").and_then(|s| s.parse().ok()).unwrap_or(1)
}

fn read_maps(path: &PathBuf) -> CliResult<MapSetFile> {
    serde_json::from_str(&std::fs::read_to_string(path)?).map_err(|e| Error::Parse(e.to_string()).into())
}

fn cmd_state(kind: &StateKind, parties: Option<usize>) -> CliResult<Outcome> {
    let t = if let Some(a) = kind.ghz {
        make_ghz(a, need_parties(parties)?)?
    } else if kind.w {
        make_w(need_parties(parties)?)?
    } else if let Some(s) = &kind.dicke {
        let (m, n) = parse_pair(s)?;
        make_dicke(m, n)?
    } else if let Some(s) = &kind.lambda {
        make_dicke_lambda(&Partition::new(parse_list(s)?)?, need_parties(parties)?)?
    } else if let Some(s) = &kind.epr {
        let (i, j) = parse_pair(s)?;
        make_epr_pair(i, j, need_parties(parties)?)?
    } else {
        return Err(CliError::Usage("choose a state".into()));
    };
    Ok(Outcome::raw(AnyTensor::from(t).to_json() + "\n"))
}

fn flattening<S: Field>(t: &SparseTensor<S>, cut: &[usize]) -> CliResult<usize> {
    Ok(t.flattening_rank(cut)?)
}

fn cmd_tensor(cmd: &TensorCmd) -> CliResult<Outcome> {
    match cmd {
        TensorCmd::Rank { input, cut } => {
            let t = read_tensor(input.as_ref())?;
            let sites = parse_list(cut)?;
            let rank = match &t {
                AnyTensor::Rational(x) => flattening(x, &sites)?,
                AnyTensor::Cyclotomic(x) => flattening(x, &sites)?,
            };
            Ok(Outcome::doc("tensor rank", json!({ "cut": sites }), json!({ "rank": rank }), true))
        }
        TensorCmd::Product { left, right, power } => {
            let a = read_tensor(Some(left))?;
            let out: AnyTensor = match (right, power) {
                (Some(r), None) => match unify(&a, &read_tensor(Some(r))?)? {
                    Pair::Rational(x, y) => x.tensor_product(&y)?.into(),
                    Pair::Cyclotomic(x, y) => x.tensor_product(&y)?.into(),
                },
                (None, Some(n)) => match &a {
                    AnyTensor::Rational(x) => x.tensor_power(*n)?.into(),
                    AnyTensor::Cyclotomic(x) => x.tensor_power(*n)?.into(),
                },
                _ => return Err(CliError::Usage("give exactly one of --right and --power".into())),
            };
            Ok(Outcome::raw(out.to_json() + "\n"))
        }
        TensorCmd::Apply { input, maps } => {
            let t = read_tensor(input.as_ref())?;
            let mf = read_maps(maps)?;
            let out: AnyTensor = match (&t, mf.scalar_domain.as_str()) {
                (AnyTensor::Rational(x), "rational") => x.apply_local_maps(&maps_from_file::<Rational>(&mf)?)?.into(),
                _ => {
                    let f = common_field(&[t.order(), map_order(&mf)])?;
                    t.to_cyclotomic(&f)?.apply_local_maps(&cyclotomic_maps(&mf, &f)?)?.into()
                }
            };
            Ok(Outcome::raw(out.to_json() + "\n"))
        }
    }
}

fn reduce_report<S: Field + Serial>(t: &SparseTensor<S>, party: Option<usize>, epr: bool, seed: u64) -> CliResult<Outcome> {
    let config = json!({ "party": party, "epr": epr, "seed": seed });
    if epr {
        let chain = epr_chain_extract(t, seed)?;
        let ok = chain.iter().all(|w| w.verified);
        let rows: Vec<Value> = chain
            .iter()
            .map(|w| {
                json!({
                    "pair": [w.first, w.partner],
                    "removed": w.steps.iter().map(|s| s.site).collect::<Vec<_>>(),
                    "stages": w.steps.iter().map(|s| s.stage.as_str()).collect::<Vec<_>>(),
                    "final_rank": w.final_rank,
                    "verified": w.verified,
                    "maps": maps_to_file(&w.maps),
                })
            })
            .collect();
        return Ok(Outcome::doc("slocc reduce", config, json!({ "witnesses": rows }), ok));
    }
    let c = party.ok_or_else(|| CliError::Usage("give --party or --epr".into()))?;
    let r = reduce_party(t, c, seed)?;
    let result = json!({
        "site": r.site,
        "form": r.form.iter().map(Serial::to_value).collect::<Vec<_>>(),
        "stage": r.stage.as_str(),
        "candidates_tried": r.candidates_tried,
        "reduced": serde_json::to_value(slocc_lab::format::tensor_to_file(&r.reduced)).expect("serializes"),
    });
    Ok(Outcome::doc("slocc reduce", config, result, true))
}

fn cmd_slocc(cmd: &SloccCmd) -> CliResult<Outcome> {
    match cmd {
        SloccCmd::Profile { input, table } => {
            let t = read_tensor(input.as_ref())?;
            let p = match &t {
                AnyTensor::Rational(x) => schmidt_profile(x)?,
                AnyTensor::Cyclotomic(x) => schmidt_profile(x)?,
            };
            if *table {
                return Ok(Outcome::raw(report::schmidt_table(&p)));
            }
            Ok(Outcome::doc("slocc profile", json!({ "parties": p.parties }), report::schmidt_json(&p), true))
        }
        SloccCmd::Check { source, target, maps } => {
            let a = read_tensor(Some(source))?;
            let b = read_tensor(Some(target))?;
            let mf = read_maps(maps)?;
            let ok = match unify(&a, &b)? {
                Pair::Rational(x, y) if mf.scalar_domain == "rational" => {
                    check_restriction(&x, &y, &maps_from_file::<Rational>(&mf)?)?
                }
                _ => {
                    let f = common_field(&[a.order(), b.order(), map_order(&mf)])?;
                    check_restriction(&a.to_cyclotomic(&f)?, &b.to_cyclotomic(&f)?, &cyclotomic_maps(&mf, &f)?)?
                }
            };
            Ok(Outcome::doc("slocc check", json!({}), json!({ "restriction": ok }), ok))
        }
        SloccCmd::Reduce { input, party, epr, seed } => match read_tensor(input.as_ref())? {
            AnyTensor::Rational(x) => reduce_report(&x, *party, *epr, *seed),
            AnyTensor::Cyclotomic(x) => reduce_report(&x, *party, *epr, *seed),
        },
    }
}

fn build_certificate(w: bool, dicke: Option<&String>, lambda: Option<&String>, parties: Option<usize>) -> CliResult<AnyCertificate> {
    match (w, dicke, lambda) {
        (true, None, None) => Ok(AnyCertificate::Rational(w_from_ghz(need_parties(parties)?)?)),
        (false, Some(s), None) => {
            let (m, n) = parse_pair(s)?;
            Ok(AnyCertificate::Cyclotomic(dicke_from_ghz(m, n)?))
        }
        (false, None, Some(s)) => {
            let lam = Partition::new(parse_list(s)?)?;
            Ok(AnyCertificate::Rational(dicke_lambda_from_ghz(&lam, need_parties(parties)?)?))
        }
        _ => Err(CliError::Usage("choose exactly one of --w, --dicke, --lambda".into())),
    }
}

fn verify_report<S: Field>(c: &DegenerationCertificate<S>) -> CliResult<Outcome> {
    let r = verify_degeneration(c)?;
    let bounds = border_rank_bounds(c.target(), r.valid.then_some(c))?;
    let mut result = report::degeneration_json(&r, c.d(), c.e());
    result["border_rank"] = report::border_rank_json(&bounds);
    let config = json!({ "source_parties": c.source().parties(), "target_dims": c.target().dims() });
    Ok(Outcome::doc("degen verify", config, result, r.valid))
}

fn cmd_degen(cmd: &DegenCmd) -> CliResult<Outcome> {
    match cmd {
        DegenCmd::Build { w, dicke, lambda, parties } => {
            let c = build_certificate(*w, dicke.as_ref(), lambda.as_ref(), *parties)?;
            Ok(Outcome::raw(c.to_json() + "\n"))
        }
        DegenCmd::Verify { input } => match AnyCertificate::parse(&read_input(input.as_ref())?)? {
            AnyCertificate::Rational(c) => verify_report(&c),
            AnyCertificate::Cyclotomic(c) => verify_report(&c),
        },
    }
}

fn interpolate_report<S: CyclotomicEmbed>(
    c: &DegenerationCertificate<S>,
    args: &InterpolateArgs,
    budget: u128,
) -> CliResult<Outcome> {
    let compiled = compile_restriction(c, args.power, budget)?;
    let bound = rank_power_bound(c, args.power, budget)?;
    let mut result = json!({
        "order": compiled.order,
        "field": format!("Q(zeta_{})", compiled.field.order()),
        "prefactor": report::rational_value(&compiled.prefactor),
        "map_shapes": compiled.maps.maps().iter().map(|m| [m.rows(), m.cols()]).collect::<Vec<_>>(),
        "rank_power": report::rank_power_json(&bound, args.power, c.e()),
    });
    let mut ok = true;
    if args.verify {
        let check = verify_compiled(&compiled, c)?;
        ok = check.ok && check.phase_map_ok;
        result["check"] = report::compiled_check_json(&check);
    }
    if args.emit_maps {
        result["maps"] = serde_json::to_value(maps_to_file(&compiled.maps)).expect("serializes");
    }
    let config = json!({ "power": args.power, "verify": args.verify, "budget": budget.to_string() });
    Ok(Outcome::doc("interpolate", config, result, ok))
}

fn cmd_interpolate(args: &InterpolateArgs, budget: u128) -> CliResult<Outcome> {
    match AnyCertificate::parse(&std::fs::read_to_string(&args.cert)?)? {
        AnyCertificate::Rational(c) => interpolate_report(&c, args, budget),
        AnyCertificate::Cyclotomic(c) => interpolate_report(&c, args, budget),
    }
}

fn cmd_support(args: &SupportArgs) -> CliResult<Outcome> {
    let psi = read_tensor(Some(&args.state))?;
    let theta = Theta::parse(&args.theta, psi.parties())?;
    let f = match &psi {
        AnyTensor::Rational(x) => functionals(x, &theta)?,
        AnyTensor::Cyclotomic(x) => functionals(x, &theta)?,
    };
    let mut result = report::support_json(&f, &theta);
    if let Some(target) = &args.target {
        let phi = read_tensor(Some(target))?;
        let grid = match args.grid {
            Some(n) => Theta::grid(psi.parties(), n)?,
            None => vec![theta.clone()],
        };
        let b = match (&psi, &phi) {
            (AnyTensor::Rational(x), AnyTensor::Rational(y)) => rate_lower_bound_support(x, y, &grid)?,
            (AnyTensor::Rational(x), AnyTensor::Cyclotomic(y)) => rate_lower_bound_support(x, y, &grid)?,
            (AnyTensor::Cyclotomic(x), AnyTensor::Rational(y)) => rate_lower_bound_support(x, y, &grid)?,
            (AnyTensor::Cyclotomic(x), AnyTensor::Cyclotomic(y)) => rate_lower_bound_support(x, y, &grid)?,
        };
        result["rate_lower_bound"] = report::rate_bound_json(&b, None);
    }
    let config = json!({ "theta": args.theta, "grid": args.grid, "target": args.target.is_some() });
    Ok(Outcome::doc("support", config, result, true))
}

fn read_elements(elements: Option<&String>, file: Option<&PathBuf>) -> CliResult<Vec<u64>> {
    let text = match (elements, file) {
        (Some(e), None) => e.clone(),
        (None, Some(p)) => std::fs::read_to_string(p)?,
        _ => return Err(CliError::Usage("give exactly one of --elements and --file".into())),
    };
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| CliError::Usage(format!("not an element: {t:?}"))))
        .collect()
}

fn cmd_avgfree(cmd: &AvgfreeCmd, budget: u128) -> CliResult<Outcome> {
    match cmd {
        AvgfreeCmd::Construct { m, d, n } => {
            let s = construct_avgfree(*m, *d, *n)?;
            Ok(Outcome::doc("avgfree construct", json!({ "m": m, "d": d, "n": n }), report::avgfree_json(&s, None), true))
        }
        AvgfreeCmd::Verify { m, elements, file } => {
            let s = AvgFreeSet::from_u64(*m, &read_elements(elements.as_ref(), file.as_ref())?)?;
            let ok = verify_avgfree_with_budget(&s, budget)?;
            Ok(Outcome::doc("avgfree verify", json!({ "m": m }), report::avgfree_json(&s, Some(ok)), ok))
        }
        AvgfreeCmd::Max { n, m } => {
            let s = max_avgfree_bruteforce(*n, *m)?;
            Ok(Outcome::doc("avgfree max", json!({ "m": m, "N": n }), report::avgfree_json(&s, None), true))
        }
        AvgfreeCmd::Best { bound, m } => {
            let s = best_avgfree_below(*bound, *m)?;
            Ok(Outcome::doc("avgfree best", json!({ "m": m, "bound": bound.to_string() }), report::avgfree_json(&s, None), true))
        }
    }
}

fn protocol_config(common: &ProtocolArgs, n: usize, seed: u64, budget: u128) -> CliResult<ProtocolConfig> {
    let mut cfg = ProtocolConfig::new(common.k, n, seed)?;
    if let Some(a) = common.alpha {
        cfg = cfg.with_alpha(a)?;
    }
    if common.lowest_other {
        cfg.rule = EliminationRule::LowestOther;
    }
    cfg.budget = budget;
    Ok(cfg)
}

fn cmd_cw(cmd: &CwCmd, budget: u128) -> CliResult<Outcome> {
    match cmd {
        CwCmd::Run { common, n, seed, b_file, realize } => {
            let mut cfg = protocol_config(common, *n, *seed, budget)?;
            if let Some(p) = b_file {
                let elems = read_elements(None, Some(p))?;
                let set = AvgFreeSet::new(common.k - 1, elems.into_iter().map(Into::into).collect(), Provenance::User)?;
                if !verify_avgfree_with_budget(&set, VERIFY_BUDGET)? {
                    return Err(CliError::Usage(format!("B from {} is not {}-average-free", p.display(), common.k - 1)));
                }
                cfg.set_b = Some(set);
            }
            let r = run_protocol(&cfg)?;
            let realized = if *realize { Some(realize_local_maps(&r)?.verified) } else { None };
            let mut result = report::protocol_json(&r, realized);
            result["expected"] = report::expected_counts_json(&expected_counts(r.k, r.n, r.modulus)?);
            result["bound"] = report::exact_pair(&format!("h(1/{})", r.k), slocc_lab::support::binary_entropy(1.0 / r.k as f64));
            let config = json!({
                "k": cfg.k,
                "n": cfg.n,
                "seed": cfg.seed,
                "alpha": report::decimal(cfg.alpha),
                "rule": format!("{:?}", cfg.rule),
                "b_file": b_file.as_ref().map(|p| p.display().to_string()),
                "realize": realize,
            });
            Ok(Outcome::doc("cw run", config, result, realized.unwrap_or(true)))
        }
        CwCmd::Sweep { common, n, seeds } => {
            let ns = parse_range(n)?;
            if common.lowest_other {
                return Err(CliError::Usage("sweeps use the default elimination rule".into()));
            }
            for &n in &ns {
                protocol_config(common, n, 0, budget)?;
            }
            let rows = rate_table(common.k, &ns, *seeds, common.alpha)?;
            let ok = rows.iter().all(|r| r.best_rate <= r.bound);
            Ok(Outcome { text: rate_rows_csv(&rows), ok })
        }
    }
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::State(StateCmd::Make { kind, parties }) => cmd_state(kind, *parties),
        Command::Tensor(c) => cmd_tensor(c),
        Command::Slocc(c) => cmd_slocc(c),
        Command::Degen(c) => cmd_degen(c),
        Command::Interpolate(a) => cmd_interpolate(a, budget(cli.budget, DEFAULT_BUDGET)?),
        Command::Support(a) => cmd_support(a),
        Command::Avgfree(c) => cmd_avgfree(c, budget(cli.budget, VERIFY_BUDGET)?),
        Command::Cw(c) => cmd_cw(c, budget(cli.budget, DEFAULT_ENUMERATION_BUDGET)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let written = match &cli.out {
                Some(p) => std::fs::write(p, &out.text),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if out.ok { ExitCode::SUCCESS } else { ExitCode::from(1) }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
