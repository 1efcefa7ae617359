//! Command surface of `torsionkit`: argument parsing, input loading, dispatch
//! to the core crate, and report emission.
//!
//! Exit codes: 0 whenever a verdict was computed (including nontrivial
//! torsion), 1 for input errors, 2 when a computed result fails its own
//! post-condition check.

use std::fmt::Write as _;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use torsionkit::chains::whitehead_torsion;
use torsionkit::groupring::GroupSpec;
use torsionkit::json::{
    derivation_to_json, group_to_json, homotopy_to_json, parse_generators, parse_text, poly_to_json,
    ring_element_to_json, CdgaInput, GerstenInput, InputError, SwindleInput, TorsionInput, TorusInput, SCHEMA_VERSION,
};
use torsionkit::nilgroups::{gcd_of, surjection_to_z, verify_homomorphism};
use torsionkit::random::{commuting_pair, random_derivation, ComplexOptions, RandomComplex};
use torsionkit::sullivan::{
    augmentation_check, block_lazarev, bracket, bracket_with_d, build_homotopy, check_cdga, exp_derivation,
    heisenberg_model, in_u_star, recovers_endpoint, sphere_model, sphere_with_u_model, Cdga, Derivation, HomotopyLine,
    Morphism,
};
use torsionkit::torsion::{gersten_torsion, swindle_check, torus_vanishing_check, TorsionReport, TorusSpec};
use torsionkit::whgroups::{bhs_is_infinite, structures_verdict, wh_rank_cyclic, SpaceSpec, CITE_MILNOR};

pub const CITE_WHITEHEAD: &str = "Whitehead torsion of an equivalence f is the K1 class of the contractible mapping cone, \
     det(d + delta) from odd to even degrees, taken modulo the trivial units +-g (Whitehead 1950; Milnor, Whitehead torsion, 1966)";
pub const CITE_GERSTEN: &str =
    "Gersten torsion: the K1(Z[G])-valued class of a self-equivalence acting as the identity on \
     pi1, with no reduction by trivial units (Gersten 1967)";
pub const CITE_SWINDLE: &str =
    "Additivity swindle: if g commutes with f up to homotopy, the map induced by g on the cofibre \
     of f has Gersten torsion tau(g) tau(g)^-1 = 1 (Waldhausen additivity)";
pub const CITE_TORUS: &str =
    "Mapping torus vanishing: a self-equivalence g of the fiber commuting with the monodromy up to \
     homotopy induces a self-map of the mapping torus whose Gersten torsion is trivial in Wh";
pub const CITE_NIL_SURJECT: &str =
    "A nontrivial finitely generated subgroup of Uni_n(Z) surjects onto Z: its image in the \
     first nonzero graded quotient of the off-diagonal filtration is a nonzero free abelian group";
pub const CITE_SULLIVAN: &str = "For a minimal Sullivan model, [i, d] is locally nilpotent for i of degree -1 and \
     exp([i, d]) is homotopic to the identity through exp([t i, d]) on M (x) Q(t, dt) (Sullivan 1977)";
pub const CITE_U_STAR: &str =
    "Derivations vanishing on degree-1 generators give homotopies that preserve the augmentation";
pub const CITE_BLOCK_LAZAREV: &str =
    "Block-Lazarev: a homotopy F + G dt starting at the identity ends at exp([int_0^1 G F^-1 dt, d])";

#[derive(Parser, Debug, Clone)]
#[command(name = "torsionkit", version, about = "Exact torsion, Whitehead-group and Sullivan-model computations")]
pub struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized verifiers.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of randomized trials.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Input document: a path, `-` for stdin, or inline JSON.
    #[arg(long, global = true)]
    pub input: Option<String>,
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Verb {
    /// Whitehead torsion of an equivalence between based complexes.
    Torsion,
    /// Gersten torsion of a self-equivalence.
    Gersten,
    /// Swindle check on a commuting pair (from --input, or random instances).
    Swindle(RandomGroup),
    /// Mapping-torus vanishing check (from --input, or random instances).
    Torus(RandomGroup),
    /// Rank of Wh(Z/n).
    WhRank {
        #[arg(allow_negative_numbers = true)]
        n: i64,
    },
    /// Whether Wh(Z x Z/n) is infinite.
    WhInfinite {
        #[arg(allow_negative_numbers = true)]
        n: i64,
    },
    /// Simple-structure verdict for a space family.
    Structures(StructuresArgs),
    /// Surjection of a unitriangular subgroup onto Z.
    NilSurject {
        #[arg(long)]
        size: Option<usize>,
        /// Generator file; defaults to --input.
        #[arg(long)]
        generators: Option<String>,
    },
    /// Derivation calculus on a Sullivan model.
    Cdga {
        action: CdgaAction,
        /// Built-in model, used when no --input is given.
        #[arg(long, value_enum)]
        model: Option<Model>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct RandomGroup {
    /// Free rank of the group for random instances.
    #[arg(long, default_value_t = 0)]
    pub free_rank: usize,
    /// Cyclic torsion factors for random instances, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub torsion: Vec<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct StructuresArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub n: Option<u64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Lens,
    Q8,
    Projective,
    Custom,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdgaAction {
    Check,
    Bracket,
    Exp,
    Homotopy,
    Bl,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Heisenberg,
    Sphere,
    SphereU,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u64,
    pub verb: String,
    pub verdict: String,
    pub data: Value,
    pub citations: Vec<String>,
    pub caveats: Vec<String>,
}

impl Report {
    fn new(verb: &str, verdict: impl Into<String>, data: Value, citations: &[&str]) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            verb: verb.into(),
            verdict: verdict.into(),
            data,
            citations: citations.iter().map(|c| c.to_string()).collect(),
            caveats: vec![],
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Contract(_) => 2,
        }
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<torsionkit::Error> for CliError {
    fn from(e: torsionkit::Error) -> Self {
        use torsionkit::Error as E;
        match e {
            E::ContractionFailure(_) | E::Contract(_) | E::NotAcyclic(_) => CliError::Contract(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn contract(ok: bool, what: &str) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Contract(what.to_string()))
    }
}

/// Loads a document from a path, stdin (`-`), or inline JSON.
pub fn parse_input(source: &str) -> CliResult<Value> {
    let trimmed = source.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        source.to_string()
    } else if source == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| CliError::Input(format!("reading stdin: {e}")))?
    } else {
        std::fs::read_to_string(source).map_err(|e| CliError::Input(format!("reading {source}: {e}")))?
    };
    Ok(parse_text(&text)?)
}

fn required_input(cli: &Cli) -> CliResult<Value> {
    let src = cli.input.as_deref().ok_or_else(|| CliError::Input("this verb needs --input".into()))?;
    parse_input(src)
}

pub fn verb_name(v: &Verb) -> &'static str {
    match v {
        Verb::Torsion => "torsion",
        Verb::Gersten => "gersten",
        Verb::Swindle(_) => "swindle",
        Verb::Torus(_) => "torus",
        Verb::WhRank { .. } => "wh-rank",
        Verb::WhInfinite { .. } => "wh-infinite",
        Verb::Structures(_) => "structures",
        Verb::NilSurject { .. } => "nil-surject",
        Verb::Cdga { .. } => "cdga",
    }
}

pub fn run(cli: &Cli) -> CliResult<Report> {
    match &cli.verb {
        Verb::Torsion => torsion(cli),
        Verb::Gersten => gersten(cli),
        Verb::Swindle(g) => swindle(cli, g),
        Verb::Torus(g) => torus(cli, g),
        Verb::WhRank { n } => wh_rank(*n),
        Verb::WhInfinite { n } => wh_infinite(*n),
        Verb::Structures(a) => structures(cli, a),
        Verb::NilSurject { size, generators } => nil_surject(cli, *size, generators.as_deref()),
        Verb::Cdga { action, model } => cdga(cli, *action, *model),
    }
}

fn torsion_data(spec: &GroupSpec, r: &TorsionReport) -> Value {
    json!({
        "group": group_to_json(spec),
        "class_det": ring_element_to_json(&r.class_det),
        "wh_canonical": ring_element_to_json(&r.wh_canonical),
        "trivial": r.trivial,
        "det_is_one": r.det_is_one,
    })
}

fn trivial_word(t: bool) -> &'static str {
    if t {
        "trivial"
    } else {
        "nontrivial"
    }
}

fn torsion(cli: &Cli) -> CliResult<Report> {
    let input = TorsionInput::parse(&required_input(cli)?)?;
    let r = TorsionReport::from_class(&whitehead_torsion(&input.pack)?);
    let mut rep = Report::new(
        "torsion",
        trivial_word(r.trivial),
        torsion_data(input.pack.f.source.spec(), &r),
        &[CITE_WHITEHEAD],
    );
    rep.caveats = r.caveats;
    Ok(rep)
}

fn gersten(cli: &Cli) -> CliResult<Report> {
    let input = GerstenInput::parse(&required_input(cli)?)?;
    let r = TorsionReport::from_class(&gersten_torsion(&input.pack)?);
    let mut rep =
        Report::new("gersten", trivial_word(r.det_is_one), torsion_data(input.complex.spec(), &r), &[CITE_GERSTEN]);
    rep.caveats = r.caveats;
    Ok(rep)
}

fn random_spec(g: &RandomGroup) -> CliResult<Arc<GroupSpec>> {
    let spec = GroupSpec::new(g.free_rank, g.torsion.clone())?;
    if spec.free_rank == 0 && spec.torsion.is_empty() {
        return Err(CliError::Input("random instances need --free-rank or --torsion".into()));
    }
    Ok(Arc::new(spec))
}

/// Per-verb settings of a randomized suite.
struct Suite {
    verb: &'static str,
    default_trials: usize,
    max_rank: usize,
    citation: &'static str,
}

/// Runs random instances of `check`; `trivial` says whether an instance
/// meets the prediction.
fn random_suite(
    suite: Suite,
    spec: &Arc<GroupSpec>,
    cli: &Cli,
    check: impl Fn(&RandomComplex, &mut ChaCha8Rng) -> CliResult<TorsionReport>,
    trivial: impl Fn(&TorsionReport) -> bool,
) -> CliResult<Report> {
    let trials = cli.trials.unwrap_or(suite.default_trials);
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut failures = vec![];
    let mut caveats = vec![];
    for trial in 0..trials {
        let acyclic = rng.gen_bool(0.3);
        let rc =
            RandomComplex::generate(spec, ComplexOptions { max_rank: suite.max_rank, max_len: 3, acyclic }, &mut rng)?;
        let r = check(&rc, &mut rng)?;
        if !trivial(&r) {
            failures.push(json!({ "trial": trial, "class_det": ring_element_to_json(&r.class_det) }));
        }
        caveats = r.caveats;
    }
    let data = json!({
        "group": group_to_json(spec),
        "seed": cli.seed,
        "instances": trials,
        "failures": failures,
    });
    let mut rep = Report::new(suite.verb, trivial_word(failures.is_empty()), data, &[suite.citation]);
    rep.caveats = caveats;
    Ok(rep)
}

fn swindle(cli: &Cli, g: &RandomGroup) -> CliResult<Report> {
    if cli.input.is_none() {
        let spec = random_spec(g)?;
        return random_suite(
            Suite { verb: "swindle", default_trials: 100, max_rank: 3, citation: CITE_SWINDLE },
            &spec,
            cli,
            |rc, rng| {
                let pair = commuting_pair(rc, rng)?;
                Ok(swindle_check(&rc.complex, &pair.f, &pair.g, &pair.comm)?)
            },
            |r| r.det_is_one,
        );
    }
    let input = SwindleInput::parse(&required_input(cli)?)?;
    let r = swindle_check(&input.complex, &input.f, &input.g, &input.comm)?;
    let mut rep =
        Report::new("swindle", trivial_word(r.det_is_one), torsion_data(input.complex.spec(), &r), &[CITE_SWINDLE]);
    rep.caveats = r.caveats;
    Ok(rep)
}

fn torus(cli: &Cli, g: &RandomGroup) -> CliResult<Report> {
    if cli.input.is_none() {
        let spec = random_spec(g)?;
        return random_suite(
            Suite { verb: "torus", default_trials: 50, max_rank: 2, citation: CITE_TORUS },
            &spec,
            cli,
            |rc, rng| {
                let pair = commuting_pair(rc, rng)?;
                let t = TorusSpec::new(rc.complex.clone(), pair.f.clone())?;
                Ok(torus_vanishing_check(&t, &pair.g, &pair.comm)?)
            },
            |r| r.trivial,
        );
    }
    let input = TorusInput::parse(&required_input(cli)?)?;
    let t = TorusSpec::new(input.fiber.clone(), input.monodromy.clone())?;
    let r = torus_vanishing_check(&t, &input.g, &input.comm)?;
    let mut rep = Report::new("torus", trivial_word(r.trivial), torsion_data(&t.ambient, &r), &[CITE_TORUS]);
    rep.caveats = r.caveats;
    Ok(rep)
}

fn wh_rank(n: i64) -> CliResult<Report> {
    let rank = wh_rank_cyclic(n)?;
    Ok(Report::new("wh-rank", rank.to_string(), json!({ "n": n, "wh_rank": rank }), &[CITE_MILNOR]))
}

fn wh_infinite(n: i64) -> CliResult<Report> {
    let r = bhs_is_infinite(n)?;
    let citations: Vec<&str> = r.reasons.iter().map(String::as_str).collect();
    let data = serde_json::to_value(&r).expect("report serializes");
    Ok(Report::new("wh-infinite", r.total_infinite.to_string(), data, &citations))
}

fn structures(cli: &Cli, a: &StructuresArgs) -> CliResult<Report> {
    let need = |x: Option<u64>, flag: &str| x.ok_or_else(|| CliError::Input(format!("this family needs --{flag}")));
    let space = match a.family {
        Some(Family::Lens) => SpaceSpec::LensTimesCircle { p: need(a.p, "p")? },
        Some(Family::Projective) => SpaceSpec::ProjectiveUnitary { n: need(a.n, "n")? },
        Some(Family::Q8) => SpaceSpec::Q8TimesCircle,
        Some(Family::Custom) | None => {
            let v = required_input(cli)?;
            serde_json::from_value(v).map_err(|e| CliError::Input(format!("space description: {e}")))?
        }
    };
    let r = structures_verdict(&space)?;
    let citations: Vec<&str> = r.reasons.iter().map(String::as_str).collect();
    let mut data = serde_json::to_value(&r).expect("report serializes");
    data["space"] = serde_json::to_value(&space).expect("space serializes");
    Ok(Report::new("structures", r.verdict.clone(), data, &citations))
}

fn nil_surject(cli: &Cli, size: Option<usize>, generators: Option<&str>) -> CliResult<Report> {
    let src =
        generators.or(cli.input.as_deref()).ok_or_else(|| CliError::Input("nil-surject needs --generators".into()))?;
    let s = parse_generators(&parse_input(src)?, size)?;
    let phi = surjection_to_z(&s)?;
    let trials = cli.trials.unwrap_or(1000);
    contract(verify_homomorphism(&phi, &s, trials, cli.seed)?, "functional is not a homomorphism on random words")?;
    let gcd = gcd_of(&phi.values_on_generators);
    contract(gcd == 1, "generator values do not have gcd 1")?;
    let data = json!({
        "size": s.size(),
        "level": phi.level,
        "weights": phi.weights,
        "divisor": phi.divisor,
        "values_on_generators": phi.values_on_generators,
        "gcd": gcd,
        "trials": trials,
        "seed": cli.seed,
    });
    Ok(Report::new("nil-surject", "surjects onto Z", data, &[CITE_NIL_SURJECT]))
}

fn morphism_json(m: &Cdga, f: &Morphism) -> Value {
    Value::Object(m.generators().iter().zip(&f.images).map(|(g, p)| (g.name.clone(), poly_to_json(m, p))).collect())
}

fn cdga(cli: &Cli, action: CdgaAction, model: Option<Model>) -> CliResult<Report> {
    let input = match (&cli.input, model) {
        (Some(_), _) => CdgaInput::parse(&required_input(cli)?)?,
        (None, Some(model)) => {
            let cdga = match model {
                Model::Heisenberg => heisenberg_model(),
                Model::Sphere => sphere_model(),
                Model::SphereU => sphere_with_u_model(),
            };
            CdgaInput { cdga, i: None, j: None, homotopy: None }
        }
        (None, None) => return Err(CliError::Input("cdga needs --input or --model".into())),
    };
    let m = &input.cdga;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let i = input.i.clone().unwrap_or_else(|| random_derivation(m, false, &mut rng));
    let di = |x: &Derivation| derivation_to_json(m, x);
    match action {
        CdgaAction::Check => {
            let c = check_cdga(m);
            let data = json!({
                "valid": c.valid,
                "d_squared_zero": c.d_squared_zero,
                "minimal": c.minimal,
                "failure": c.failure,
            });
            Ok(Report::new("cdga", if c.valid { "valid" } else { "invalid" }, data, &[]))
        }
        CdgaAction::Bracket => {
            let big_d = bracket_with_d(&i, m)?;
            contract(bracket(m, &m.differential(), &big_d).is_zero(), "[d, [i, d]] is nonzero")?;
            let j = input.j.clone().unwrap_or_else(|| random_derivation(m, false, &mut rng));
            let big_dj = bracket_with_d(&j, m)?;
            let k = bracket(m, &i, &big_dj);
            let closed = bracket(m, &big_d, &big_dj) == bracket_with_d(&k, m)?;
            contract(closed, "[[i, d], [j, d]] differs from [k, d] for k = [i, [j, d]]")?;
            let data = json!({ "i": di(&i), "j": di(&j), "i_d": di(&big_d), "k": di(&k) });
            Ok(Report::new("cdga", "closed under brackets", data, &[CITE_SULLIVAN]))
        }
        CdgaAction::Exp => {
            let big_d = bracket_with_d(&i, m)?;
            let e = exp_derivation(&big_d, m)?;
            let data = json!({ "i": di(&i), "exp": morphism_json(m, &e), "in_u_star": in_u_star(&i, m) });
            Ok(Report::new("cdga", "automorphism", data, &[CITE_SULLIVAN]))
        }
        CdgaAction::Homotopy => {
            let (h, from_i) = homotopy_for(&input, &i)?;
            contract(h.at_zero() == Morphism::identity(m), "homotopy does not start at the identity")?;
            if from_i {
                contract(recovers_endpoint(&i, &h, m)?, "homotopy does not end at exp([i, d])")?;
            }
            let augmented = augmentation_check(&h);
            if from_i && in_u_star(&i, m) {
                contract(augmented, "derivation vanishes in degree 1 but the homotopy moves the augmentation")?;
            }
            let mut data = json!({ "homotopy": homotopy_to_json(m, &h), "augmentation_preserving": augmented });
            if from_i {
                data["i"] = di(&i);
                data["in_u_star"] = json!(in_u_star(&i, m));
            }
            let verdict = if augmented { "augmented homotopy to the identity" } else { "homotopy to the identity" };
            Ok(Report::new("cdga", verdict, data, &[CITE_SULLIVAN, CITE_U_STAR]))
        }
        CdgaAction::Bl => {
            let (h, _) = homotopy_for(&input, &i)?;
            let j = block_lazarev(&h, m)?;
            contract(recovers_endpoint(&j, &h, m)?, "exp([j, d]) differs from the homotopy endpoint")?;
            let data = json!({ "recovered": di(&j), "endpoint": morphism_json(m, &h.at_one()) });
            Ok(Report::new("cdga", "endpoint recovered", data, &[CITE_BLOCK_LAZAREV]))
        }
    }
}

/// The input homotopy, or the one built from `i`; the flag says which.
fn homotopy_for(input: &CdgaInput, i: &Derivation) -> CliResult<(HomotopyLine, bool)> {
    match &input.homotopy {
        Some(h) => Ok((h.clone(), false)),
        None => Ok((build_homotopy(i, &input.cdga)?, true)),
    }
}

/// Parses a document of the kind named by its file-name prefix (`torsion_`,
/// `gersten_`, `swindle_`, `torus_`, `nil_`, `cdga_`, `space_`) and
/// serializes it again in canonical form.
pub fn reserialize(file_name: &str, v: &Value) -> CliResult<Value> {
    let kind = file_name.split('_').next().unwrap_or_default();
    Ok(match kind {
        "torsion" => TorsionInput::parse(v)?.to_json(),
        "gersten" => GerstenInput::parse(v)?.to_json(),
        "swindle" => SwindleInput::parse(v)?.to_json(),
        "torus" => TorusInput::parse(v)?.to_json(),
        "nil" => torsionkit::json::generators_to_json(&parse_generators(v, None)?),
        "cdga" => CdgaInput::parse(v)?.to_json(),
        "space" => {
            let s: SpaceSpec = serde_json::from_value(v.clone()).map_err(|e| CliError::Input(e.to_string()))?;
            serde_json::to_value(s).expect("space serializes")
        }
        _ => return Err(CliError::Input(format!("unknown document kind for {file_name}"))),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

/// Deterministic bytes for a report.
pub fn emit(r: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "{}: {}", r.verb, r.verdict);
            let data = serde_json::to_string_pretty(&r.data).expect("data serializes");
            let _ = writeln!(s, "data:");
            for line in data.lines() {
                let _ = writeln!(s, "  {line}");
            }
            if !r.citations.is_empty() {
                let _ = writeln!(s, "citations:");
                for c in &r.citations {
                    let _ = writeln!(s, "  - {c}");
                }
            }
            if !r.caveats.is_empty() {
                let _ = writeln!(s, "caveats:");
                for c in &r.caveats {
                    let _ = writeln!(s, "  - {c}");
                }
            }
            s
        }
    }
}

/// Parses arguments, runs, and renders. Returns the bytes for stdout, the
/// bytes for stderr and the exit code.
pub fn main_with_args<I, T>(args: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    (text, String::new(), 0)
                }
                _ => (String::new(), text, 1),
            };
        }
    };
    let format = if cli.json { Format::Json } else { Format::Text };
    match run(&cli) {
        Ok(r) => (emit(&r, format), String::new(), 0),
        Err(e) => {
            let out = if cli.json {
                let kind = match e {
                    CliError::Input(_) => "input",
                    CliError::Contract(_) => "contract",
                };
                let v = json!({
                    "schema": SCHEMA_VERSION,
                    "verb": verb_name(&cli.verb),
                    "error": { "kind": kind, "message": e.to_string() },
                });
                format!("{}\n", serde_json::to_string_pretty(&v).expect("errors serialize"))
            } else {
                String::new()
            };
            (out, format!("torsionkit: {e}\n"), e.exit_code())
        }
    }
}
