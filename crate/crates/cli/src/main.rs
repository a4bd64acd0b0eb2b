//! Command-line front end: reads instance, profile, tree and model files,
//! runs the solvers and prints deterministic reports.
//!
//! Exit codes: 0 on success, 2 on invalid input (bad flags, unreadable or
//! malformed files), 3 when a solver reports that it could not finish
//! (no constrained equilibrium, pass limit, no admissible tree outcome).

use clap::{Parser, Subcommand, ValueEnum};
use matchgame::cne::CnePolicy;
use matchgame::extensive::{constrained_spe, is_admissible};
use matchgame::format::{
    adapt_model, parse_instance, parse_profile, parse_tree, write_instance, write_profile, ModelKind,
};
use matchgame::lattice::join;
use matchgame::oracle::{enumerate_stable, DEFAULT_CAP};
use matchgame::propose::run_propose_dispose;
use matchgame::rational::{is_integer, parse_rational};
use matchgame::refine::{refine, PolicyTable, RefineStatus};
use matchgame::stability::{check, Notion, StabilityError, StabilityReport, Witness};
use matchgame::{Instance, MatchingProfile, Rational, Side};
use num_traits::Signed;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "matchgame", version, about = "Stable matching markets where couples play games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the propose-dispose market and report external stability.
    SolveExternal {
        file: PathBuf,
        /// Stability margin (defaults to 1 on all-integer instances).
        #[arg(long, value_parser = rational_arg)]
        eps: Option<Rational>,
        #[arg(long, value_enum, default_value_t = SideArg::Men)]
        side: SideArg,
        /// Write the proposal trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the resulting profile here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the market, then refine every couple to a constrained equilibrium.
    SolveStable {
        file: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        eps: Option<Rational>,
        #[arg(long, value_enum, default_value_t = SideArg::Men)]
        side: SideArg,
        #[arg(long, value_enum, default_value_t = PolicyArg::Auto)]
        policy: PolicyArg,
        #[arg(long)]
        max_passes: Option<usize>,
        /// Write the replacement trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a profile against one stability notion.
    Verify {
        file: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, value_enum)]
        notion: NotionArg,
        #[arg(long, value_parser = rational_arg)]
        eps: Option<Rational>,
    },
    /// List every profile satisfying a notion (exhaustive; small instances only).
    Enumerate {
        file: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        eps: Option<Rational>,
        #[arg(long, value_enum)]
        notion: NotionArg,
        /// Refuse instances with more profiles than this.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u128,
    },
    /// Combine two stable profiles, each agent of a side keeping the better outcome.
    Join {
        file: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Constrained subgame-perfect equilibrium of a game tree.
    Spe {
        tree: PathBuf,
        /// Outside options, one per player, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = rational_arg, allow_hyphen_values = true)]
        outs: Vec<Rational>,
    },
    /// Convert a classical matching model into an instance file.
    Adapt {
        #[arg(value_enum)]
        kind: KindArg,
        model: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Men,
    Women,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Men => Side::Men,
            SideArg::Women => Side::Women,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Auto,
    MaxPotential,
    ZeroSum,
    Repeated,
}

impl PolicyArg {
    fn table(self) -> PolicyTable {
        match self {
            PolicyArg::Auto => PolicyTable::new(),
            PolicyArg::MaxPotential => PolicyTable::uniform(CnePolicy::MaxPotential),
            PolicyArg::ZeroSum => PolicyTable::uniform(CnePolicy::ZeroSumMedian),
            PolicyArg::Repeated => PolicyTable::uniform(CnePolicy::RepeatedOracle),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NotionArg {
    Ext,
    Int,
    Weak,
    Uni,
    Nash,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Ordinal,
    ShapleyShubik,
    GaleDemange,
    Contracts,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> ModelKind {
        match k {
            KindArg::Ordinal => ModelKind::Ordinal,
            KindArg::ShapleyShubik => ModelKind::ShapleyShubik,
            KindArg::GaleDemange => ModelKind::GaleDemange,
            KindArg::Contracts => ModelKind::Contracts,
        }
    }
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s.trim()).map_err(|e| e.reason.to_string())
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    parse_instance(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_profile(path: &Path, inst: &Instance) -> Result<MatchingProfile, Failure> {
    parse_profile(&read(path)?, inst).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// The given margin, or 1 when every payoff and IRP is an integer.
fn margin(eps: Option<Rational>, inst: &Instance, positive: bool) -> Result<Rational, Failure> {
    let eps = match eps {
        Some(e) => e,
        None => {
            let irps = [Side::Men, Side::Women].into_iter().flat_map(|s| (0..inst.len(s)).map(move |a| (s, a)));
            let integral = irps.into_iter().all(|(s, a)| is_integer(inst.irp(s, a)))
                && inst.games().all(|(_, _, g)| g.menu().iter().all(|c| is_integer(&c.u) && is_integer(&c.v)));
            if !integral {
                return Err(invalid("--eps is required: the instance has non-integer payoffs"));
            }
            Rational::from_integer(1.into())
        }
    };
    if eps.is_negative() || (positive && !eps.is_positive()) {
        let bound = if positive { "positive" } else { "nonnegative" };
        return Err(invalid(format!("--eps must be {bound}, got {eps}")));
    }
    Ok(eps)
}

fn render_profile(inst: &Instance, p: &MatchingProfile) -> String {
    let mut out = String::from("profile:\n");
    for i in 0..inst.n_men() {
        let man = inst.name(Side::Men, i);
        match (p.partner_of_man(i), p.contract_of_man(i)) {
            (Some(j), Some(c)) => {
                let _ = writeln!(out, "  {man} & {}: {c}", inst.name(Side::Women, j));
            }
            _ => {
                let _ = writeln!(out, "  {man}: single ({})", inst.irp_man(i));
            }
        }
    }
    for j in (0..inst.n_women()).filter(|&j| p.partner_of_woman(j).is_none()) {
        let _ = writeln!(out, "  {}: single ({})", inst.name(Side::Women, j), inst.irp_woman(j));
    }
    out
}

fn render_witness(inst: &Instance, w: &Witness) -> String {
    let who = |side: Side| if side == Side::Men { "man" } else { "woman" };
    match w {
        Witness::BelowIrp { side, agent, payoff, irp } => {
            format!("{} {} earns {payoff} below individually rational {irp}", who(*side), inst.name(*side, *agent))
        }
        Witness::BlockingPair { man, woman, contract } => {
            format!("{} and {} block with {contract}", inst.name(Side::Men, *man), inst.name(Side::Women, *woman))
        }
        Witness::Deviation { man, woman, deviator, contract } => format!(
            "in couple {} & {} the {} deviates to {contract}",
            inst.name(Side::Men, *man),
            inst.name(Side::Women, *woman),
            who(*deviator)
        ),
    }
}

fn render_report(inst: &Instance, r: &StabilityReport) -> String {
    match &r.witness {
        None => format!("{}: holds\n", r.notion),
        Some(w) => format!("{}: fails ({})\n", r.notion, render_witness(inst, w)),
    }
}

fn notion_of(n: NotionArg, eps: &Rational) -> Notion {
    match n {
        NotionArg::Ext if eps.is_positive() => Notion::ExternalEps,
        NotionArg::Ext => Notion::External0,
        NotionArg::Int => Notion::Internal,
        NotionArg::Weak => Notion::Weak,
        NotionArg::Uni => Notion::Unilateral,
        NotionArg::Nash => Notion::Nash,
    }
}

/// Runs a check; internal stability of a profile that is not externally
/// stable is reported as a failure with the external witness.
fn report(inst: &Instance, p: &MatchingProfile, notion: Notion, eps: &Rational) -> Result<StabilityReport, Failure> {
    match check(inst, p, notion, eps) {
        Ok(r) => Ok(r),
        Err(StabilityError::NotExternallyStable(w)) => Ok(StabilityReport { notion, holds: false, witness: Some(w) }),
        Err(e) => Err(invalid(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<(String, u8), Failure> {
    let mut out = String::new();
    let mut code = 0;
    match cli.command {
        Command::SolveExternal { file, eps, side, trace, out: target } => {
            let inst = load_instance(&file)?;
            let eps = margin(eps, &inst, true)?;
            let (profile, state) = run_propose_dispose(&inst, &eps, side.into()).map_err(|e| invalid(e.to_string()))?;
            if let Some(path) = trace {
                write(&path, &state.trace_text())?;
            }
            if let Some(path) = target {
                write(&path, &write_profile(&inst, &profile))?;
            }
            out += &render_profile(&inst, &profile);
            let _ = writeln!(out, "proposals: {}", state.iterations());
            out += &render_report(&inst, &report(&inst, &profile, Notion::ExternalEps, &eps)?);
        }
        Command::SolveStable { file, eps, side, policy, max_passes, trace, out: target } => {
            let inst = load_instance(&file)?;
            let eps = margin(eps, &inst, true)?;
            let (start, _) = run_propose_dispose(&inst, &eps, side.into()).map_err(|e| invalid(e.to_string()))?;
            let refined =
                refine(&inst, &start, &eps, &policy.table(), max_passes).map_err(|e| invalid(e.to_string()))?;
            if let Some(path) = trace {
                write(&path, &refined.trace_text())?;
            }
            if let Some(path) = target {
                write(&path, &write_profile(&inst, &refined.profile))?;
            }
            let _ = writeln!(out, "status: {}", refined.status.name());
            if let RefineStatus::Infeasible { man, woman, error } = &refined.status {
                let _ = writeln!(
                    out,
                    "couple {} & {}: {error}",
                    inst.name(Side::Men, *man),
                    inst.name(Side::Women, *woman)
                );
            }
            let _ = writeln!(out, "passes: {}", refined.passes);
            let _ = writeln!(out, "replacements: {}", refined.trace.len());
            out += &render_profile(&inst, &refined.profile);
            out += &render_report(&inst, &report(&inst, &refined.profile, Notion::ExternalEps, &eps)?);
            out += &render_report(&inst, &report(&inst, &refined.profile, Notion::Internal, &eps)?);
            if refined.status != RefineStatus::Converged {
                code = 3;
            }
        }
        Command::Verify { file, profile, notion, eps } => {
            let inst = load_instance(&file)?;
            let needs_eps = matches!(notion, NotionArg::Ext | NotionArg::Int);
            let eps = if needs_eps { margin(eps, &inst, false)? } else { eps.unwrap_or_default() };
            let p = load_profile(&profile, &inst)?;
            let r = report(&inst, &p, notion_of(notion, &eps), &eps)?;
            let _ = writeln!(out, "notion: {}", r.notion);
            if needs_eps {
                let _ = writeln!(out, "eps: {eps}");
            }
            let _ = writeln!(out, "holds={}", r.holds);
            if let Some(w) = &r.witness {
                let _ = writeln!(out, "witness: {}", render_witness(&inst, w));
            }
        }
        Command::Enumerate { file, eps, notion, cap } => {
            if !matches!(notion, NotionArg::Ext | NotionArg::Int) {
                return Err(invalid("enumerate supports --notion ext or int"));
            }
            let inst = load_instance(&file)?;
            let eps = margin(eps, &inst, false)?;
            let notion = notion_of(notion, &eps);
            let found = enumerate_stable(&inst, &eps, notion, cap).map_err(|e| invalid(e.to_string()))?;
            let _ = writeln!(out, "notion: {notion}");
            let _ = writeln!(out, "eps: {eps}");
            let _ = writeln!(out, "profiles: {}", found.len());
            for (k, p) in found.iter().enumerate() {
                let _ = writeln!(out, "[{}]", k + 1);
                out += &render_profile(&inst, p);
            }
        }
        Command::Join { file, a, b, side, out: target } => {
            let inst = load_instance(&file)?;
            let pa = load_profile(&a, &inst)?;
            let pb = load_profile(&b, &inst)?;
            let joined = join(&inst, &pa, &pb, side.into()).map_err(|e| invalid(e.to_string()))?;
            if let Some(path) = target {
                write(&path, &write_profile(&inst, &joined))?;
            }
            out += &render_profile(&inst, &joined);
            let zero = Rational::default();
            out += &render_report(&inst, &report(&inst, &joined, Notion::External0, &zero)?);
        }
        Command::Spe { tree, outs } => {
            let path = tree;
            let tree = parse_tree(&read(&path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            let admissible = is_admissible(&tree, &outs).map_err(|e| invalid(e.to_string()))?;
            let _ = writeln!(out, "admissible: {admissible}");
            match constrained_spe(&tree, &outs).map_err(|e| invalid(e.to_string()))? {
                Some(profile) => {
                    out += "choices:\n";
                    for (node, child) in &profile {
                        let _ = writeln!(out, "  node {node}: child {child}");
                    }
                    let leaf = tree.outcome(&profile, tree.root());
                    let payoffs: Vec<String> = tree.payoffs(leaf).iter().map(ToString::to_string).collect();
                    let _ = writeln!(out, "outcome: node {leaf} ({})", payoffs.join(", "));
                }
                None => {
                    out += "no constrained subgame-perfect equilibrium\n";
                    code = 3;
                }
            }
        }
        Command::Adapt { kind, model, output } => {
            let inst =
                adapt_model(kind.into(), &read(&model)?).map_err(|e| invalid(format!("{}: {e}", model.display())))?;
            write(&output, &write_instance(&inst))?;
            let _ = writeln!(out, "wrote {} (men: {}, women: {})", output.display(), inst.n_men(), inst.n_women());
        }
    }
    Ok((out, code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((text, code)) => {
            print!("{text}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
