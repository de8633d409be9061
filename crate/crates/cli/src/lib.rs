//! Command-line front end: argument parsing, dispatch to the library, and
//! machine-readable reports.
//!
//! Exit codes: 0 for definite results, 2 for inconclusive searches, 1 for
//! errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};
use thiserror::Error;

use canonfn_core::behavior::{coherence_check, enumerate_behaviors};
use canonfn_core::canonicity::{check_canonical, proposition_harness, Verdict};
use canonfn_core::canonize::{canonize_within, constant_groups, CanonizeOutcome, DEFAULT_NODE_BUDGET};
use canonfn_core::fraisse::{
    parse_rat, verify_amalgamation, AgeOracle, AgeReport, LimitStructure, Rat,
};
use canonfn_core::group::{GroupPresentation, Point};
use canonfn_core::oracle::FunctionOracle;
use canonfn_core::symbolic::{canonical_iso, pham_refute, ComputableDenseSet};
use canonfn_core::text;
use canonfn_core::Error;

pub const EXIT_DEFINITE: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "canonfn", version, about = "Canonical functions between countable homogeneous structures")]
struct Cli {
    /// Structure spec file (`structure <name> = builtin:..|forbidden:..`).
    #[arg(long, global = true, value_name = "FILE")]
    structures: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Debug, Args)]
struct CheckArgs {
    #[arg(long, value_parser = oracle_syntax)]
    f: String,
    #[arg(long, default_value = "aut(dlo)")]
    source: String,
    #[arg(long, default_value = "aut(dlo)")]
    target: String,
    #[arg(long, default_value_t = 8)]
    horizon: usize,
    #[arg(long, default_value_t = 2)]
    arity: usize,
}

#[derive(Clone, Debug, Subcommand)]
enum Command {
    /// Count orbits of k-tuples.
    Orbits {
        #[arg(value_name = "STRUCTURE")]
        name: Option<String>,
        #[arg(long)]
        structure: Option<String>,
        /// Count under a group presentation instead of a structure.
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        arity: usize,
    },
    /// Enumerate coherent behavior tables.
    Behaviors {
        #[arg(long, default_value = "aut(dlo)")]
        source: String,
        #[arg(long, default_value = "aut(dlo)")]
        target: String,
        #[arg(long)]
        arity: usize,
    },
    /// Check canonicity within a horizon.
    Check {
        #[command(flatten)]
        args: CheckArgs,
        /// Write the observed behavior table here.
        #[arg(long, value_name = "FILE")]
        save: Option<PathBuf>,
    },
    /// Search for a canonical function in the closure of H f G.
    Canonize {
        #[arg(long, value_parser = oracle_syntax)]
        f: String,
        #[arg(long, default_value = "aut(dlo)")]
        source: String,
        #[arg(long, default_value = "aut(dlo)")]
        target: String,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        /// File with one constant point per line; the source must be aut(dlo)
        /// or a power of it.
        #[arg(long, value_name = "FILE")]
        constants: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
    },
    /// Obstruction certificate for the isomorphism Q -> Q \ {0}.
    Pham {
        #[arg(long, value_parser = rational_syntax, allow_hyphen_values = true)]
        epsilon: Rat,
        #[arg(long, default_value_t = 512)]
        budget: usize,
    },
    /// Build a finite fragment of a limit and print its demand log.
    Limit {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        size: usize,
        #[arg(long, value_name = "FILE")]
        save: Option<PathBuf>,
    },
    /// Check hereditariness and amalgamation up to a size bound.
    VerifyAge {
        /// linear-orders, graphs, ordered-graphs, pure-sets, or a structure name.
        #[arg(long)]
        age: String,
        #[arg(long, default_value_t = 3)]
        bound: usize,
    },
    /// Compare the three finite proxies of canonicity.
    Harness {
        #[command(flatten)]
        args: CheckArgs,
    },
    /// Print the committed pairs of a back-and-forth isomorphism.
    Iso {
        #[arg(long, default_value = "q")]
        source: String,
        #[arg(long, default_value = "q-minus-0")]
        target: String,
        #[arg(long, default_value_t = 10)]
        points: usize,
    },
}

fn oracle_syntax(s: &str) -> Result<String, String> {
    FunctionOracle::parse(s, &|_| Ok(FunctionOracle::Identity))
        .map(|_| s.to_string())
        .map_err(|e| e.to_string())
}

fn rational_syntax(s: &str) -> Result<Rat, String> {
    parse_rat(s).ok_or_else(|| format!("expected p/q or an integer, got {s:?}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verb {
    Orbits,
    Behaviors,
    Check,
    Canonize,
    Pham,
    Limit,
    VerifyAge,
    Harness,
    Iso,
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verb::Orbits => "orbits",
            Verb::Behaviors => "behaviors",
            Verb::Check => "check",
            Verb::Canonize => "canonize",
            Verb::Pham => "pham",
            Verb::Limit => "limit",
            Verb::VerifyAge => "verify-age",
            Verb::Harness => "harness",
            Verb::Iso => "iso",
        };
        f.write_str(s)
    }
}

/// A validated command.
#[derive(Clone, Debug)]
pub struct CommandSpec {
    command: Command,
    structures: Option<PathBuf>,
    argv: Vec<String>,
}

/// An argument that does not fit the command grammar.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("usage error at argument {position} ({token:?}): {message}")]
pub struct UsageError {
    /// Index into argv of the offending token (0 is the program name).
    pub position: usize,
    pub token: String,
    pub expected: Vec<String>,
    pub message: String,
    /// Help and version requests are not failures.
    pub informational: bool,
}

fn context_strings(v: Option<&ContextValue>) -> Vec<String> {
    match v {
        Some(ContextValue::String(s)) => vec![s.clone()],
        Some(ContextValue::Strings(ss)) => ss.clone(),
        _ => Vec::new(),
    }
}

fn usage_error(err: clap::Error, argv: &[String]) -> UsageError {
    let informational = matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
    let arg = context_strings(err.get(ContextKind::InvalidArg)).into_iter().next();
    let flag = arg
        .as_deref()
        .and_then(|a| a.split_whitespace().next())
        .unwrap_or("")
        .to_string();
    let token = context_strings(err.get(ContextKind::InvalidValue))
        .into_iter()
        .chain(context_strings(err.get(ContextKind::InvalidSubcommand)))
        .chain(arg.clone())
        .next()
        .unwrap_or_default();
    let skip = argv.len().min(1);
    let find = |hit: &dyn Fn(&String) -> bool| argv.iter().skip(skip).position(hit).map(|i| i + skip);
    let position = find(&|a| !token.is_empty() && a == &token)
        .or_else(|| find(&|a| !flag.is_empty() && (a == &flag || a.starts_with(&format!("{flag}=")))))
        .unwrap_or(argv.len());
    let mut expected = context_strings(err.get(ContextKind::ValidValue));
    expected.extend(context_strings(err.get(ContextKind::ValidSubcommand)));
    if expected.is_empty() {
        match err.kind() {
            ErrorKind::MissingRequiredArgument => expected = context_strings(err.get(ContextKind::InvalidArg)),
            ErrorKind::ValueValidation | ErrorKind::InvalidValue => expected.push(format!("valid value for {flag}")),
            ErrorKind::MissingSubcommand
            | ErrorKind::InvalidSubcommand
            | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => expected.extend(
                [
                    "orbits",
                    "behaviors",
                    "check",
                    "canonize",
                    "pham",
                    "limit",
                    "verify-age",
                    "harness",
                    "iso",
                ]
                .map(String::from),
            ),
            _ => {}
        }
    }
    UsageError {
        position,
        token,
        expected,
        message: err.render().to_string().trim_end().to_string(),
        informational,
    }
}

/// Parses argv (including the program name) and validates every option,
/// group string and oracle string before anything is computed.
pub fn parse_command<I, T>(argv: I) -> Result<CommandSpec, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<String> = argv
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let cli = Cli::try_parse_from(&argv).map_err(|e| usage_error(e, &argv))?;
    let spec = CommandSpec {
        command: cli.command,
        structures: cli.structures,
        argv,
    };
    spec.validate()?;
    Ok(spec)
}

impl CommandSpec {
    pub fn verb(&self) -> Verb {
        match &self.command {
            Command::Orbits { .. } => Verb::Orbits,
            Command::Behaviors { .. } => Verb::Behaviors,
            Command::Check { .. } => Verb::Check,
            Command::Canonize { .. } => Verb::Canonize,
            Command::Pham { .. } => Verb::Pham,
            Command::Limit { .. } => Verb::Limit,
            Command::VerifyAge { .. } => Verb::VerifyAge,
            Command::Harness { .. } => Verb::Harness,
            Command::Iso { .. } => Verb::Iso,
        }
    }

    /// Options as key-value pairs, in a fixed order.
    pub fn options(&self) -> BTreeMap<&'static str, String> {
        let mut o = BTreeMap::new();
        let path = |p: &Path| p.display().to_string();
        match &self.command {
            Command::Orbits {
                name,
                structure,
                group,
                arity,
            } => {
                if let Some(s) = structure.as_ref().or(name.as_ref()) {
                    o.insert("structure", s.clone());
                }
                if let Some(g) = group {
                    o.insert("group", g.clone());
                }
                o.insert("arity", arity.to_string());
            }
            Command::Behaviors { source, target, arity } => {
                o.insert("source", source.clone());
                o.insert("target", target.clone());
                o.insert("arity", arity.to_string());
            }
            Command::Check { args, save } => {
                check_options(args, &mut o);
                if let Some(p) = save {
                    o.insert("save", path(p));
                }
            }
            Command::Harness { args } => check_options(args, &mut o),
            Command::Canonize {
                f,
                source,
                target,
                arity,
                depth,
                horizon,
                constants,
                budget,
            } => {
                o.insert("f", f.clone());
                o.insert("source", source.clone());
                o.insert("target", target.clone());
                o.insert("arity", arity.to_string());
                o.insert("depth", depth.to_string());
                o.insert("horizon", horizon.to_string());
                o.insert("budget", budget.to_string());
                if let Some(p) = constants {
                    o.insert("constants", path(p));
                }
            }
            Command::Pham { epsilon, budget } => {
                o.insert("epsilon", canonfn_core::fraisse::format_rat(epsilon));
                o.insert("budget", budget.to_string());
            }
            Command::Limit { structure, size, save } => {
                o.insert("structure", structure.clone());
                o.insert("size", size.to_string());
                if let Some(p) = save {
                    o.insert("save", path(p));
                }
            }
            Command::VerifyAge { age, bound } => {
                o.insert("age", age.clone());
                o.insert("bound", bound.to_string());
            }
            Command::Iso { source, target, points } => {
                o.insert("source", source.clone());
                o.insert("target", target.clone());
                o.insert("points", points.to_string());
            }
        }
        if let Some(p) = &self.structures {
            o.insert("structures", path(p));
        }
        o
    }

    fn at(&self, value: &str, expected: &str, message: String) -> UsageError {
        UsageError {
            position: self.argv.iter().position(|a| a == value).unwrap_or(self.argv.len()),
            token: value.to_string(),
            expected: vec![expected.to_string()],
            message,
            informational: false,
        }
    }

    fn validate(&self) -> Result<(), UsageError> {
        let registry = self
            .registry()
            .map_err(|e| self.at(&self.structures_arg(), "structure spec file", e.to_string()))?;
        let group = |g: &str| -> Result<(), UsageError> {
            registry
                .group(g)
                .map(|_| ())
                .map_err(|e| self.at(g, "group spec", e.to_string()))
        };
        match &self.command {
            Command::Orbits {
                name, structure, group: g, ..
            } => match (name.as_ref().or(structure.as_ref()), g) {
                (Some(s), None) => {
                    registry
                        .limit(s)
                        .map_err(|e| self.at(s, "structure name", e.to_string()))?;
                }
                (None, Some(g)) => group(g)?,
                _ => {
                    return Err(UsageError {
                        position: 1,
                        token: "orbits".into(),
                        expected: vec!["--structure".into(), "--group".into()],
                        message: "give exactly one of a structure or --group".into(),
                        informational: false,
                    })
                }
            },
            Command::Behaviors { source, target, .. } => {
                group(source)?;
                group(target)?;
            }
            Command::Check { args, .. } | Command::Harness { args } => {
                group(&args.source)?;
                group(&args.target)?;
            }
            Command::Canonize {
                source,
                target,
                constants,
                ..
            } => {
                group(source)?;
                if constants.is_none() {
                    group(target)?;
                }
            }
            Command::Limit { structure, .. } => {
                registry
                    .limit(structure)
                    .map_err(|e| self.at(structure, "structure name", e.to_string()))?;
            }
            Command::VerifyAge { age, .. } => {
                registry.age(age).map_err(|e| self.at(age, "age name", e.to_string()))?;
            }
            Command::Iso { source, target, .. } => {
                for s in [source, target] {
                    if ComputableDenseSet::by_name(s).is_none() {
                        return Err(self.at(s, "q or q-minus-0", format!("unknown dense set {s:?}")));
                    }
                }
            }
            Command::Pham { .. } => {}
        }
        Ok(())
    }

    fn structures_arg(&self) -> String {
        self.structures
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_default()
    }

    fn registry(&self) -> Result<Registry, Error> {
        Registry::new(self.structures.as_deref())
    }

    pub fn argv(&self) -> &[String] {
        &self.argv
    }
}

fn check_options(args: &CheckArgs, o: &mut BTreeMap<&'static str, String>) {
    o.insert("f", args.f.clone());
    o.insert("source", args.source.clone());
    o.insert("target", args.target.clone());
    o.insert("horizon", args.horizon.to_string());
    o.insert("arity", args.arity.to_string());
}

/// Named limits: the built-ins plus those of a structure spec file.
struct Registry {
    limits: BTreeMap<String, Arc<LimitStructure>>,
}

impl Registry {
    fn new(spec: Option<&Path>) -> Result<Self, Error> {
        let mut limits = BTreeMap::new();
        for name in ["dlo", "rado", "ordered-rado", "pureset"] {
            let l = LimitStructure::builtin(name).expect("built-in");
            limits.insert(name.to_string(), Arc::new(l));
        }
        if let Some(path) = spec {
            let body = std::fs::read_to_string(path).map_err(|e| Error::Format {
                line: 0,
                reason: format!("cannot read {}: {e}", path.display()),
            })?;
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            let read = |p: &str| std::fs::read_to_string(dir.join(p));
            limits.extend(text::load_structure_specs(&body, &read)?);
        }
        Ok(Registry { limits })
    }

    fn limit(&self, name: &str) -> Result<Arc<LimitStructure>, Error> {
        self.limits
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Presentation(format!("unknown structure {name:?}")))
    }

    fn group(&self, s: &str) -> Result<GroupPresentation, Error> {
        GroupPresentation::parse(s, &|n| self.limits.get(n).cloned())
    }

    fn age(&self, name: &str) -> Result<AgeOracle, Error> {
        Ok(match name {
            "linear-orders" => AgeOracle::linear_orders(),
            "graphs" => AgeOracle::graphs(),
            "ordered-graphs" => AgeOracle::ordered_graphs(),
            "pure-sets" => AgeOracle::pure_sets(),
            n => self.limit(n)?.age().clone(),
        })
    }
}

fn load_oracle(s: &str) -> Result<FunctionOracle, Error> {
    FunctionOracle::parse(s, &|path| {
        let body = std::fs::read_to_string(path).map_err(|e| Error::Format {
            line: 0,
            reason: format!("cannot read {path}: {e}"),
        })?;
        Ok(FunctionOracle::table(text::load_function_table(&body)?))
    })
}

fn load_constants(path: &Path, group: &GroupPresentation) -> Result<Vec<Point>, Error> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::Format {
        line: 0,
        reason: format!("cannot read {}: {e}", path.display()),
    })?;
    let mut out = Vec::new();
    for (i, l) in body.lines().enumerate() {
        let l = l.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let p = group.parse_point(l).map_err(|e| Error::Format {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(p);
    }
    Ok(out)
}

/// Runs a validated command, returning the exit code and the report.
pub fn run(spec: &CommandSpec) -> (i32, String) {
    match execute(spec) {
        Ok(r) => r,
        Err(e) => (EXIT_ERROR, format!("error: {e}\n")),
    }
}

fn execute(spec: &CommandSpec) -> Result<(i32, String), Error> {
    let reg = spec.registry()?;
    match &spec.command {
        Command::Orbits {
            name,
            structure,
            group,
            arity,
        } => {
            let n = match (name.as_ref().or(structure.as_ref()), group) {
                (Some(s), _) => reg.limit(s)?.count_orbits(*arity)?,
                (None, Some(g)) => reg.group(g)?.count_orbits(*arity)?,
                (None, None) => unreachable!("validated"),
            };
            Ok((EXIT_DEFINITE, format!("orbits: {n}\n")))
        }
        Command::Behaviors { source, target, arity } => {
            let (g, h) = (reg.group(source)?, reg.group(target)?);
            let tables = enumerate_behaviors(&g, &h, *arity)?;
            let mut out = format!("tables: {}\n", tables.len());
            for (i, t) in tables.iter().enumerate() {
                out += &format!(
                    "table: {}\ncoherent: {}\n{t}",
                    i + 1,
                    if coherence_check(t).is_ok() { "ok" } else { "violation" }
                );
            }
            Ok((EXIT_DEFINITE, out))
        }
        Command::Check { args, save } => {
            let f = load_oracle(&args.f)?;
            let (g, h) = (reg.group(&args.source)?, reg.group(&args.target)?);
            let verdict = check_canonical(&f, &g, &h, args.horizon, args.arity)?;
            if let (Some(path), Verdict::CanonicalUpTo { behavior, .. }) = (save, &verdict) {
                std::fs::write(path, text::persist_behavior(behavior)).map_err(|e| Error::Format {
                    line: 0,
                    reason: format!("cannot write {}: {e}", path.display()),
                })?;
            }
            Ok((EXIT_DEFINITE, verdict.report()))
        }
        Command::Harness { args } => {
            let f = load_oracle(&args.f)?;
            let (g, h) = (reg.group(&args.source)?, reg.group(&args.target)?);
            let r = proposition_harness(&f, &g, &h, args.horizon, args.arity)?;
            Ok((EXIT_DEFINITE, r.report()))
        }
        Command::Canonize {
            f,
            source,
            target,
            arity,
            depth,
            horizon,
            constants,
            budget,
        } => {
            let f = load_oracle(f)?;
            let (g, h) = match constants {
                Some(path) => {
                    let base = reg.group(source)?;
                    if !base.limit().is_dlo() || !base.constants().is_empty() {
                        return Err(Error::Presentation(
                            "--constants needs aut(dlo) or power(aut(dlo),m) as the source".into(),
                        ));
                    }
                    let c = load_constants(path, &base)?;
                    constant_groups(&f, base.columns(), &c)?
                }
                None => (reg.group(source)?, reg.group(target)?),
            };
            let domain = g.domain_prefix(*depth)?;
            let candidates = g.limit().elements(*horizon)?;
            match canonize_within(&f, &g, &h, *arity, domain, candidates, *budget)? {
                CanonizeOutcome::Approximation(a) => Ok((EXIT_DEFINITE, a.report())),
                CanonizeOutcome::HorizonExhausted {
                    nodes,
                    deepest,
                    budget_hit,
                } => Ok((
                    EXIT_INCONCLUSIVE,
                    format!(
                        "result: horizon-exhausted\nnodes: {nodes}\ndeepest: {deepest}\nbudget_hit: {budget_hit}\n"
                    ),
                )),
            }
        }
        Command::Pham { epsilon, budget } => match pham_refute(epsilon, *budget) {
            Ok(cert) => {
                let mut out = format!("result: certificate\n{cert}");
                for (claim, ok) in cert.claims()? {
                    out += &format!("claim: {claim}: {ok}\n");
                }
                match cert.verify() {
                    Ok(()) => Ok((EXIT_DEFINITE, out + "verified: true\n")),
                    Err(_) => Ok((EXIT_INCONCLUSIVE, out + "verified: false\n")),
                }
            }
            Err(Error::BudgetExhausted(why)) => Ok((EXIT_INCONCLUSIVE, format!("result: inconclusive\nreason: {why}\n"))),
            Err(e) => Err(e),
        },
        Command::Limit { structure, size, save } => {
            let limit = reg.limit(structure)?;
            let frag = limit.fragment(*size)?;
            if let Some(path) = save {
                std::fs::write(path, text::persist_structure(&frag)).map_err(|e| Error::Format {
                    line: 0,
                    reason: format!("cannot write {}: {e}", path.display()),
                })?;
            }
            let mut out = format!("structure: {}\nelements:", limit.name());
            for e in limit.elements(*size)? {
                out += &format!(" {e}");
            }
            out += &format!("\n{}", text::persist_structure(&frag));
            for d in limit.demand_log() {
                out += &format!(
                    "demand: element {} fragment {} extension {}\n",
                    d.element, d.fragment_size, d.extension
                );
            }
            Ok((EXIT_DEFINITE, out))
        }
        Command::VerifyAge { age, bound } => {
            let age = reg.age(age)?;
            let report = verify_amalgamation(&age, *bound);
            Ok((EXIT_DEFINITE, age_report(&report)))
        }
        Command::Iso { source, target, points } => {
            let s = ComputableDenseSet::by_name(source).expect("validated");
            let t = ComputableDenseSet::by_name(target).expect("validated");
            let map = canonical_iso(s, t)?;
            map.run_to(*points)?;
            let mut out = String::new();
            for (x, y) in map.commits().iter().take(*points) {
                out += &format!(
                    "{} -> {}\n",
                    canonfn_core::fraisse::format_rat(x),
                    canonfn_core::fraisse::format_rat(y)
                );
            }
            Ok((EXIT_DEFINITE, out))
        }
    }
}

fn age_report(r: &AgeReport) -> String {
    match r {
        AgeReport::Success { bound, members_checked } => {
            format!("result: success\nbound: {bound}\nmembers: {members_checked}\n")
        }
        AgeReport::EmptyStructureRejected => "result: violation\nkind: empty structure rejected\n".into(),
        AgeReport::HereditaryViolation { member, removed_point } => format!(
            "result: violation\nkind: hereditary\nmember: {}\nremoved_point: {removed_point}\n",
            text::structure_line(member)
        ),
        AgeReport::IsomorphismViolation { member, permutation } => format!(
            "result: violation\nkind: isomorphism\nmember: {}\npermutation: {permutation:?}\n",
            text::structure_line(member)
        ),
        AgeReport::AmalgamationViolation { base, left, right } => format!(
            "result: violation\nkind: amalgamation\nbase: {}\nleft: {}\nright: {}\n",
            text::structure_line(base),
            text::structure_line(left),
            text::structure_line(right)
        ),
    }
}

/// What a run did, for reproducibility logs. The digest covers the command,
/// exit code and report, so identical commands give identical digests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunRecord {
    pub command: String,
    pub determinism: &'static str,
    pub version: &'static str,
    pub wall_time: Duration,
    pub exit_code: i32,
    pub digest: String,
}

impl RunRecord {
    pub fn new(argv: &[String], exit_code: i32, report: &str, wall_time: Duration) -> Self {
        let command = argv.get(1..).unwrap_or_default().join(" ");
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(exit_code.to_le_bytes());
        h.update(report.as_bytes());
        RunRecord {
            command,
            determinism: "deterministic: no random seeds are used",
            version: concat!("canonfn ", env!("CARGO_PKG_VERSION")),
            wall_time,
            exit_code,
            digest: hex::encode(h.finalize()),
        }
    }
}

impl fmt::Display for RunRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command: {}", self.command)?;
        writeln!(f, "{}", self.determinism)?;
        writeln!(f, "version: {}", self.version)?;
        writeln!(f, "wall_time_ms: {}", self.wall_time.as_millis())?;
        writeln!(f, "exit_code: {}", self.exit_code)?;
        writeln!(f, "digest: {}", self.digest)
    }
}

/// Parses, runs and records one invocation.
pub fn run_argv<I, T>(argv: I) -> (i32, String, Option<RunRecord>)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let start = Instant::now();
    match parse_command(argv) {
        Ok(spec) => {
            let (code, report) = run(&spec);
            let record = RunRecord::new(spec.argv(), code, &report, start.elapsed());
            (code, report, Some(record))
        }
        Err(u) if u.informational => (EXIT_DEFINITE, format!("{}\n", u.message), None),
        Err(u) => {
            let expected = if u.expected.is_empty() {
                String::new()
            } else {
                format!("expected: {}\n", u.expected.join(", "))
            };
            (
                EXIT_ERROR,
                format!("error: usage\nposition: {}\ntoken: {}\n{expected}{}\n", u.position, u.token, u.message),
                None,
            )
        }
    }
}
