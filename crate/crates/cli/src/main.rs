use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gentop::canopy::{affinize, validate_canopy, verify_affinization, CanopyError};
use gentop::fintop::{probe_catalog, ContinuousMap, FinSpace, TopologyError};
use gentop::format::{emit_map, emit_space, parse_set, Kind, ParseError, Registry};
use gentop::gencat::{
    fiber_separation_failure, is_cover, is_diffuse, is_local_homeomorphism, is_open_embedding,
    pullback_embedding, CoverFailure, CoverMode, GenError,
};
use gentop::grpquot::{
    build_quotient, certify_pseudoetale, quotient_property_check, ActionError, GroupAction, Verdict,
};
use gentop::lambda_rep::{lambda_construct, pullback_via_lambda, verify_representability, LambdaError, NegInstance};
use gentop::negligible::{is_zdense, ylem2_check, NegligibleError};
use gentop::quotmor::{pointwise_vs_component_report, EqualityKind, QuotError};
use gentop::schwarz_numeric::{diffuse_sample_report, pathology_witness_search, report_csv, SchwarzConfig, SchwarzError};
use gentop::{Budget, PointSet};

#[derive(Parser)]
#[command(name = "gentop", version, about = "Negligible sets, diffuse maps and group quotients of finite spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide a property of a set, map or family of maps.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Pull a map back along an open embedding or through Λ.
    #[command(subcommand)]
    Pullback(PullbackCmd),
    #[command(subcommand)]
    Canopy(CanopyCmd),
    #[command(subcommand)]
    Quotient(QuotientCmd),
    #[command(subcommand)]
    Morphism(MorphismCmd),
    #[command(subcommand)]
    Lambda(LambdaCmd),
    #[command(subcommand)]
    Schwarz(SchwarzCmd),
    #[command(subcommand)]
    Probe(ProbeCmd),
}

#[derive(Args)]
struct Inputs {
    /// Input files, loaded in order into one namespace.
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Is the open set Z-dense?
    Zdense {
        file: PathBuf,
        set: String,
        #[arg(long)]
        space: Option<String>,
    },
    /// Is the closed set negligible in the given open (default: the whole space)?
    Negligible {
        file: PathBuf,
        set: String,
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        within: Option<String>,
    },
    Diffuse {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        map: Option<String>,
    },
    Embedding {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        map: Option<String>,
    },
    Cover {
        #[command(flatten)]
        inputs: Inputs,
        /// Comma-separated leg names.
        #[arg(long, value_delimiter = ',', required = true)]
        maps: Vec<String>,
        #[arg(long, value_enum, default_value_t = Mode::Pseudogeometric)]
        mode: Mode,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Pseudogeometric,
    Pseudoetale,
}

#[derive(Subcommand)]
enum PullbackCmd {
    /// Pullback of `--map` along the open embedding `--along`.
    Embedding {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        map: String,
        #[arg(long)]
        along: String,
    },
    /// Pullback of `--c` along `--b`, allowed to branch over `--set`.
    General {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        c: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value = "{}")]
        set: String,
        #[arg(long, default_value_t = 0)]
        probes: usize,
    },
}

#[derive(Subcommand)]
enum CanopyCmd {
    Validate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        canopy: Option<String>,
    },
    Affinize {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        canopy: Option<String>,
    },
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        canopy: Option<String>,
        #[arg(long, default_value_t = 3)]
        probes: usize,
    },
}

#[derive(Subcommand)]
enum QuotientCmd {
    Certify {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        action: Option<String>,
    },
    Build {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        action: Option<String>,
    },
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        action: Option<String>,
        #[arg(long, default_value_t = 3)]
        probes: usize,
    },
}

#[derive(Subcommand)]
enum MorphismCmd {
    /// Compare two maps into the space acted on, as maps into the quotient.
    Equal {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        action: Option<String>,
    },
}

#[derive(Subcommand)]
enum LambdaCmd {
    Build {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        family: Option<String>,
    },
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        family: Option<String>,
        #[arg(long, default_value_t = 3)]
        probes: usize,
    },
}

#[derive(Subcommand)]
enum SchwarzCmd {
    Report {
        #[arg(long, default_value_t = 5)]
        nmax: usize,
        #[arg(long, default_value_t = 0.01)]
        grid: f64,
        /// Write samples and witnesses as CSV (`-` for stdout).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ProbeCmd {
    /// All spaces of the given size, one per homeomorphism class.
    Catalog {
        #[arg(long)]
        size: usize,
    },
}

enum Failure {
    Usage(String),
    Parse(ParseError),
    Budget(String),
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Parse(e)
    }
}

impl From<TopologyError> for Failure {
    fn from(e: TopologyError) -> Self {
        match e {
            TopologyError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

macro_rules! via_topology {
    ($($t:ty => $v:path),* $(,)?) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                match e {
                    $v(t) => t.into(),
                    e => Failure::Usage(e.to_string()),
                }
            }
        }
    )*};
}

via_topology!(
    NegligibleError => NegligibleError::Topology,
    GenError => GenError::Topology,
    CanopyError => CanopyError::Topology,
    ActionError => ActionError::Topology,
);

impl From<LambdaError> for Failure {
    fn from(e: LambdaError) -> Self {
        match e {
            LambdaError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            LambdaError::Topology(t) => t.into(),
            LambdaError::Negligible(n) => n.into(),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<QuotError> for Failure {
    fn from(e: QuotError) -> Self {
        match e {
            QuotError::Gen(g) => g.into(),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<SchwarzError> for Failure {
    fn from(e: SchwarzError) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Report text and whether the checked property holds.
struct Outcome {
    text: String,
    holds: bool,
}

impl Outcome {
    fn new(text: String, holds: bool) -> Self {
        Outcome { text, holds }
    }
}

fn load(files: &[PathBuf]) -> Result<Registry, Failure> {
    let mut reg = Registry::with_fixtures();
    for f in files {
        let name = f.display().to_string();
        let text = std::fs::read_to_string(f).map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
        reg.load(&name, &text)?;
    }
    Ok(reg)
}

fn pick<'a, T>(
    reg: &'a Registry,
    table: &'a std::collections::BTreeMap<String, T>,
    kind: Kind,
    name: Option<&str>,
    what: &str,
) -> Result<&'a T, Failure> {
    let name = match name {
        Some(n) => n.to_string(),
        None => reg
            .last_of(kind)
            .map(str::to_string)
            .or_else(|| (table.len() == 1).then(|| table.keys().next().cloned()).flatten())
            .ok_or_else(|| Failure::Usage(format!("no {what} given; name one with --{what}")))?,
    };
    table
        .get(&name)
        .ok_or_else(|| Failure::Usage(format!("unknown {what} `{name}`")))
}

fn space<'a>(reg: &'a Registry, name: Option<&str>) -> Result<&'a FinSpace, Failure> {
    pick(reg, &reg.spaces, Kind::Space, name, "space")
}

fn action<'a>(reg: &'a Registry, name: Option<&str>) -> Result<&'a GroupAction, Failure> {
    pick(reg, &reg.actions, Kind::Action, name, "action")
}

/// Continuous map by name, or a refutation naming the discontinuity.
fn map(reg: &Registry, name: Option<&str>) -> Result<Result<ContinuousMap, String>, Failure> {
    let raw = pick(reg, &reg.maps, Kind::Map, name, "map")?;
    Ok(raw.into_map().map_err(|e| format!("map {}: {e}", raw.name)))
}

fn need_map(reg: &Registry, name: &str) -> Result<ContinuousMap, Failure> {
    map(reg, Some(name))?.map_err(Failure::Usage)
}

fn set(space: &FinSpace, lit: &str) -> Result<PointSet, Failure> {
    parse_set(space, lit).map_err(Failure::Usage)
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let budget = Budget::DEFAULT;
    match cli.cmd {
        Cmd::Check(c) => check(c),
        Cmd::Pullback(PullbackCmd::Embedding { inputs, map: f, along }) => {
            let reg = load(&inputs.files)?;
            let (f, u) = (need_map(&reg, &f)?, need_map(&reg, &along)?);
            let pb = pullback_embedding(&f, &u)?;
            let mut t = emit_space(&pb.space);
            t.push_str(&emit_map("v", &pb.v));
            t.push_str(&emit_map("g", &pb.g));
            Ok(Outcome::new(t, true))
        }
        Cmd::Pullback(PullbackCmd::General { inputs, c, b, set: lit, probes }) => {
            let reg = load(&inputs.files)?;
            let (c, b) = (need_map(&reg, &c)?, need_map(&reg, &b)?);
            let i = set(b.dom(), &lit)?;
            let pb = pullback_via_lambda(&c, &b, i, &budget)?;
            let mut t = format!("pairs: {}\nlambda points: {}\n", pb.pairs.len(), pb.lambda.len());
            t.push_str(&emit_space(&pb.lambda.space));
            t.push_str(&emit_map("lambda", &pb.lambda.lambda));
            let mut holds = true;
            if probes > 0 {
                let rep = verify_representability(&pb.instance, &pb.lambda, probes, &budget)?;
                let _ = writeln!(t, "probes: {} maps: {} failures: {}", rep.probes_checked, rep.maps_checked, rep.failures.len());
                holds = rep.holds();
            }
            Ok(Outcome::new(t, holds))
        }
        Cmd::Canopy(c) => canopy(c, &budget),
        Cmd::Quotient(q) => quotient(q, &budget),
        Cmd::Morphism(MorphismCmd::Equal { inputs, f, g, action: a }) => {
            let reg = load(&inputs.files)?;
            let act = action(&reg, a.as_deref())?;
            let (f, g) = (need_map(&reg, &f)?, need_map(&reg, &g)?);
            let v = pointwise_vs_component_report(&f, &g, act)?;
            let dom = f.dom();
            let mut t = format!("kind,{:?}\ncomponent,h\n", v.kind);
            for (comp, h) in &v.per_component {
                let h = h.map(|h| act.element_name(h)).unwrap_or("");
                let _ = writeln!(t, "\"{}\",{}", dom.fmt_set(*comp), h);
            }
            t.push_str("pathology_point\n");
            for x in v.pathology_points.iter() {
                let _ = writeln!(t, "\"{}\"", dom.label(x));
            }
            Ok(Outcome::new(t, v.kind == EqualityKind::ComponentWise))
        }
        Cmd::Lambda(LambdaCmd::Build { inputs, family }) => {
            let reg = load(&inputs.files)?;
            let fam = pick(&reg, &reg.families, Kind::Family, family.as_deref(), "family")?;
            let inst = NegInstance::new(&fam.space, &fam.elements, &budget)?;
            let lam = lambda_construct(&inst, &budget)?;
            let mut t = format!("points: {}\nconnected: {}\n", lam.len(), yes(lam.space.is_connected()));
            t.push_str(&emit_space(&lam.space));
            t.push_str(&emit_map("lambda", &lam.lambda));
            Ok(Outcome::new(t, true))
        }
        Cmd::Lambda(LambdaCmd::Verify { inputs, family, probes }) => {
            let reg = load(&inputs.files)?;
            let fam = pick(&reg, &reg.families, Kind::Family, family.as_deref(), "family")?;
            let inst = NegInstance::new(&fam.space, &fam.elements, &budget)?;
            let lam = lambda_construct(&inst, &budget)?;
            let rep = verify_representability(&inst, &lam, probes, &budget)?;
            let mut t = format!(
                "probes: {}\nmaps checked: {}\nfailures: {}\n",
                rep.probes_checked,
                rep.maps_checked,
                rep.failures.len()
            );
            for f in &rep.failures {
                let _ = writeln!(t, "{:?} on {}: {:?}", f.kind, f.probe, f.map);
            }
            Ok(Outcome::new(t, rep.holds()))
        }
        Cmd::Schwarz(SchwarzCmd::Report { nmax, grid, csv }) => {
            let cfg = SchwarzConfig {
                n_max: nmax,
                grid_step: grid,
                ..SchwarzConfig::default()
            };
            let mut report = diffuse_sample_report(&cfg)?;
            let search = pathology_witness_search(&cfg)?;
            report.witnesses = search.witnesses;
            report.pointwise_agreement = search.pointwise_agreement;
            report.grid_points = search.grid_points;
            let mut t = String::new();
            for s in &report.strata {
                let _ = writeln!(t, "{}: {}", s.stratum, if s.obstruction { "obstruction" } else { "no obstruction" });
            }
            let _ = writeln!(t, "witnesses: {}", report.witnesses.len());
            let _ = writeln!(t, "pointwise agreement: {} ({} grid points)", yes(report.pointwise_agreement), report.grid_points);
            let _ = writeln!(t, "diffuse: {}", yes(report.diffuse()));
            match csv {
                Some(p) if p.as_os_str() == "-" => t = report_csv(&report),
                Some(p) => std::fs::write(&p, report_csv(&report))
                    .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
                None => {}
            }
            Ok(Outcome::new(t, report.diffuse() && report.pointwise_agreement))
        }
        Cmd::Probe(ProbeCmd::Catalog { size }) => {
            let mut t = String::new();
            for s in probe_catalog(size, &budget)? {
                t.push_str(&emit_space(&s));
            }
            Ok(Outcome::new(t, true))
        }
    }
}

fn check(c: CheckCmd) -> Result<Outcome, Failure> {
    match c {
        CheckCmd::Zdense { file, set: lit, space: s } => {
            let reg = load(&[file])?;
            let x = space(&reg, s.as_deref())?;
            let v = set(x, &lit)?;
            Ok(match is_zdense(x, v)? {
                Ok(()) => Outcome::new(format!("{} is Z-dense\n", x.fmt_set(v)), true),
                Err(c) => Outcome::new(
                    format!("{} is not Z-dense: trace on connected open {} is empty or disconnected\n", x.fmt_set(v), x.fmt_set(c)),
                    false,
                ),
            })
        }
        CheckCmd::Negligible { file, set: lit, space: s, within } => {
            let reg = load(&[file])?;
            let x = space(&reg, s.as_deref())?;
            let i = set(x, &lit)?;
            let (x, i) = match within {
                Some(w) => {
                    let u = set(x, &w)?;
                    if !x.is_open_set(u) {
                        return Err(Failure::Usage(format!("{} is not open", x.fmt_set(u))));
                    }
                    let (sub, inc) = x.subspace_with_inclusion(u)?;
                    let pre = inc.preimage(i);
                    (sub, pre)
                }
                None => (x.clone(), i),
            };
            let v = ylem2_check(&x, i)?;
            let mut t = format!("{} negligible: {}\n", x.fmt_set(i), yes(v.negligible));
            if let Some(p) = gentop::negligible::local_failure(&x, i) {
                let _ = writeln!(t, "fails at {}: U minus I = {}", x.label(p), x.fmt_set(x.minopen(p).minus(i)));
            }
            Ok(Outcome::new(t, v.negligible))
        }
        CheckCmd::Diffuse { inputs, map: m } => {
            let reg = load(&inputs.files)?;
            let f = match map(&reg, m.as_deref())? {
                Ok(f) => f,
                Err(e) => return Ok(Outcome::new(format!("not continuous: {e}\n"), false)),
            };
            let v = is_diffuse(&f);
            let mut t = format!("diffuse: {}\n", yes(v.diffuse));
            for r in &v.certificate {
                let _ = writeln!(t, "{}", r.describe(&f));
            }
            if let Some(w) = &v.witness {
                let _ = writeln!(t, "witness: {}", w.describe(&f));
            }
            Ok(Outcome::new(t, v.diffuse))
        }
        CheckCmd::Embedding { inputs, map: m } => {
            let reg = load(&inputs.files)?;
            let f = match map(&reg, m.as_deref())? {
                Ok(f) => f,
                Err(e) => return Ok(Outcome::new(format!("not continuous: {e}\n"), false)),
            };
            let emb = is_open_embedding(&f);
            let mut t = format!(
                "open embedding: {}\nlocal homeomorphism: {}\n",
                yes(emb),
                yes(is_local_homeomorphism(&f))
            );
            if let Some((a, b)) = fiber_separation_failure(&f) {
                let _ = writeln!(t, "fiber points not separated: {} {}", f.dom().label(a), f.dom().label(b));
            }
            Ok(Outcome::new(t, emb))
        }
        CheckCmd::Cover { inputs, maps, mode } => {
            let reg = load(&inputs.files)?;
            let legs = maps.iter().map(|m| need_map(&reg, m)).collect::<Result<Vec<_>, _>>()?;
            let target = legs[0].cod().clone();
            let mode = match mode {
                Mode::Pseudogeometric => CoverMode::Pseudogeometric,
                Mode::Pseudoetale => CoverMode::Pseudoetale,
            };
            Ok(match is_cover(&legs, &target, mode)? {
                Ok(()) => Outcome::new("cover: yes\n".into(), true),
                Err(CoverFailure::Uncovered(s)) => {
                    Outcome::new(format!("cover: no\nuncovered: {}\n", target.fmt_set(s)), false)
                }
                Err(CoverFailure::BadLeg { leg, reason }) => {
                    Outcome::new(format!("cover: no\nleg {}: {reason}\n", maps[leg]), false)
                }
            })
        }
    }
}

fn canopy(c: CanopyCmd, budget: &Budget) -> Result<Outcome, Failure> {
    let (inputs, name) = match &c {
        CanopyCmd::Validate { inputs, canopy } | CanopyCmd::Affinize { inputs, canopy } => (inputs, canopy),
        CanopyCmd::Verify { inputs, canopy, .. } => (inputs, canopy),
    };
    let reg = load(&inputs.files)?;
    let can = pick(&reg, &reg.canopies, Kind::Canopy, name.as_deref(), "canopy")?;
    if let Err(e) = validate_canopy(can) {
        return match e {
            CanopyError::AxiomFailure { .. } => Ok(Outcome::new(format!("valid: no\n{e}\n"), false)),
            e => Err(e.into()),
        };
    }
    match c {
        CanopyCmd::Validate { .. } => Ok(Outcome::new("valid: yes\n".into(), true)),
        CanopyCmd::Affinize { .. } => {
            let aff = affinize(can)?;
            let mut t = emit_space(aff.space());
            for (j, a) in aff.alpha.iter().enumerate() {
                t.push_str(&emit_map(&format!("alpha_{}", can.chart_names[j]), a));
            }
            Ok(Outcome::new(t, true))
        }
        CanopyCmd::Verify { probes, .. } => {
            let aff = affinize(can)?;
            let r = verify_affinization(&aff, probes, budget)?;
            let mut t = format!("cover: {}\n", yes(r.cover));
            let diffuse: Vec<&str> = r.alpha_diffuse.iter().map(|&d| yes(d)).collect();
            let _ = writeln!(t, "alpha diffuse: {}", diffuse.join(" "));
            if let Some((p, q)) = &r.relation_mismatch {
                let _ = writeln!(t, "relation mismatch: {p} {q}");
            }
            if let Some(f) = &r.fibered_failure {
                let _ = writeln!(t, "fibered product: {f}");
            }
            let _ = writeln!(t, "glues checked: {} (probes up to {})", r.glues_checked, r.probe_bound);
            if let Some(f) = &r.colimit_failure {
                let _ = writeln!(t, "colimit failure on {}: {:?}", f.probe, f.glue);
            }
            let _ = writeln!(t, "passes: {}", yes(r.passes()));
            Ok(Outcome::new(t, r.passes()))
        }
    }
}

fn quotient(q: QuotientCmd, budget: &Budget) -> Result<Outcome, Failure> {
    let (inputs, name) = match &q {
        QuotientCmd::Certify { inputs, action } | QuotientCmd::Build { inputs, action } => (inputs, action),
        QuotientCmd::Verify { inputs, action, .. } => (inputs, action),
    };
    let reg = load(&inputs.files)?;
    let act = action(&reg, name.as_deref())?;
    let b = act.space();
    match q {
        QuotientCmd::Certify { .. } => {
            let cert = certify_pseudoetale(act);
            let qs = &cert.quotient.space;
            let mut t = format!("action: {} on {} (order {})\n", act.name(), b.name(), act.order());
            let _ = writeln!(t, "free locus: {}", b.fmt_set(cert.free_locus));
            let _ = writeln!(t, "K: {}", b.fmt_set(cert.upper));
            let _ = writeln!(t, "b(K): {}", qs.fmt_set(cert.lower));
            let _ = writeln!(t, "separated: {}", yes(cert.separation.separated));
            match &cert.verdict {
                Verdict::Accept { b_diffuse, lower_negligible } => {
                    let _ = writeln!(t, "verdict: accept");
                    let _ = writeln!(t, "b diffuse: {}", yes(*b_diffuse));
                    let _ = writeln!(t, "b(K) negligible: {}", yes(*lower_negligible));
                }
                Verdict::Reject { reason, witness } => {
                    let _ = writeln!(t, "verdict: reject: {reason}");
                    let _ = writeln!(t, "witness: {witness}");
                }
            }
            Ok(Outcome::new(t, cert.accepted()))
        }
        QuotientCmd::Build { .. } => {
            let quot = build_quotient(act);
            let mut t = emit_space(&quot.space);
            t.push_str(&emit_map("b", &quot.projection));
            Ok(Outcome::new(t, true))
        }
        QuotientCmd::Verify { probes, .. } => {
            let r = quotient_property_check(act, probes, budget)?;
            let mut t = format!("b diffuse: {}\n", yes(r.b_diffuse));
            let quot = build_quotient(act);
            if let Some(w) = &r.b_witness {
                let _ = writeln!(t, "witness: {}", w.describe(&quot.projection));
            }
            let _ = writeln!(t, "maps checked: {} (probes up to {})", r.maps_checked, r.probe_bound);
            let _ = writeln!(t, "violations: {}", r.violations.len());
            for v in &r.violations {
                let _ = writeln!(t, "  {} {:?} (h diffuse: {})", v.probe, v.h, yes(v.h_diffuse));
            }
            Ok(Outcome::new(t, r.holds()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let _ = std::io::Write::write_all(&mut std::io::stdout().lock(), out.text.as_bytes());
            ExitCode::from(if out.holds { 0 } else { 1 })
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Parse(e)) => {
            eprintln!("parse error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("{m}");
            ExitCode::from(3)
        }
    }
}
