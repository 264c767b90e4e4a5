//! The `dhl` command line.
//!
//! Exit codes: 0 witness or success, 1 certified none, 2 unknown (a budget ran
//! out or the result is only a bound), 64 usage error, 65 malformed or
//! unreadable input, 74 an output file could not be written.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use dhl_core::counterexamples::{
    baire_example, baire_reciprocal_sum, cantor_density_bound, cantor_example, marked_witness_search, verify_no_height2,
    NoFanCertificate,
};
use dhl_core::density::{
    correlated_set, fubini_majority, is_strongly_correlated, level_density_profile, refine_selection, section_selection,
    Correlation, LevelSelection,
};
use dhl_core::enumerate::{enumerate_strong, SearchSpace};
use dhl_core::fans::{enumerate_fans, theta, theta_sequence, theta_within_bounds, FanError};
use dhl_core::search::{avoidance_extremal, dhl_number, extract_1d, DhlNumber, ExtractResult, ExtremalOptions};
use dhl_core::subtree::{canonical_isomorphism, validate_vector};
use dhl_core::{Budget, BranchingVector, Homogeneous, LevelSubset, Node, Outcome, Rational, SearchOutcome, VectorStrongSubtree};

use crate::format::{self, SubtreeFile};
use crate::runner::first_witness;

pub const EXIT_WITNESS: u8 = 0;
pub const EXIT_NONE: u8 = 1;
pub const EXIT_UNKNOWN: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_MALFORMED: u8 = 65;
pub const EXIT_WRITE: u8 = 74;

#[derive(Parser, Debug)]
#[command(name = "dhl", version, about = "Strong subtrees, fans and dense level selections of finite trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for witness searches.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Expansion cap for searches and enumerations.
    #[arg(long, global = true, env = "DHL_MAX_NODES")]
    max_nodes: Option<u64>,
    /// Wall-clock cap in seconds; results under it may differ between runs.
    #[arg(long, global = true, env = "DHL_MAX_SECONDS")]
    max_seconds: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fan counts and fan enumeration.
    Fans {
        #[command(subcommand)]
        action: FansCommand,
    },
    /// Strong subtree validation and enumeration.
    Subtree {
        #[command(subcommand)]
        action: SubtreeCommand,
    },
    /// The canonical isomorphism between two subtrees, coordinate by coordinate.
    Iso {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
    },
    /// Strong correlation of a subtree with a node, for the sections of a set.
    Correlate {
        #[command(subcommand)]
        action: CorrelateCommand,
    },
    /// The majority set of the sections over one source level.
    Fubini {
        #[arg(long)]
        set: PathBuf,
        #[arg(long, value_parser = parse_rational)]
        eta: Rational,
        /// Source level.
        #[arg(long)]
        level: usize,
    },
    /// The one-step refined selection on the zero-direction subtree.
    Refine {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        subtree: PathBuf,
    },
    /// Monochromatic subtree search in a coloring.
    Hl {
        #[command(subcommand)]
        action: HlCommand,
    },
    /// Subtree searches inside sets, the avoidance extremal and finite numbers.
    Dhl {
        #[command(subcommand)]
        action: DhlCommand,
    },
    /// Greedy extraction of a strong subtree from dense levels of a one-dimensional set.
    Extract1d {
        #[arg(long)]
        set: PathBuf,
        #[arg(long, value_parser = parse_rational)]
        epsilon: Rational,
        /// Height of the subtree to extract.
        #[arg(long)]
        height: usize,
        /// Least number of later levels a threshold is checked on.
        #[arg(long)]
        w_min: usize,
        /// Levels to use; defaults to every level of density at least epsilon.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<usize>,
    },
    /// Dense sets without fans in non-homogeneous trees.
    Cex {
        #[command(subcommand)]
        action: CexCommand,
    },
    /// Level, initial-segment and chain densities of a set.
    Fw {
        #[arg(long)]
        set: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Shape {
    /// Branching numbers, comma separated.
    #[arg(long = "b", value_delimiter = ',', required = true)]
    b: Vec<u32>,
}

#[derive(Subcommand, Debug)]
enum FansCommand {
    /// The number of fans with top level n.
    Count {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        n: usize,
        /// Also print the correlation thresholds for this density.
        #[arg(long, value_parser = parse_rational, requires = "target_branching")]
        epsilon: Option<Rational>,
        #[arg(long)]
        target_branching: Option<u32>,
    },
    /// Every fan with top level n.
    Enum {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
enum SubtreeCommand {
    /// Checks the strong subtree conditions.
    Validate {
        #[arg(long)]
        file: PathBuf,
        /// Truncate the hosts to this height.
        #[arg(long)]
        height: Option<usize>,
    },
    /// Every strong subtree of height k inside the first n levels.
    Enum {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Subcommand, Debug)]
enum CorrelateCommand {
    /// Whether the pair is strongly correlated, with a certificate when not.
    Check {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        subtree: PathBuf,
        #[arg(long)]
        w: String,
        #[arg(long, value_parser = parse_rational)]
        theta: Rational,
    },
    /// Every node of the root section that is strongly correlated with the subtree.
    Set {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        subtree: PathBuf,
        #[arg(long, value_parser = parse_rational)]
        theta: Rational,
    },
}

#[derive(Subcommand, Debug)]
enum HlCommand {
    /// First monochromatic subtree of height k.
    Search {
        #[arg(long)]
        coloring: PathBuf,
        #[arg(long)]
        k: usize,
        /// Write the witness as a subtree file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum DhlCommand {
    /// First subtree of height k whose level product lies in the set.
    Search {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The largest minimum level density of a set with no subtree of height k.
    Extremal {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        no_symmetry: bool,
        /// Write an extremal set.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The least N beyond which every set of density epsilon has a subtree of height k.
    Number {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        k: usize,
        #[arg(long, value_parser = parse_rational)]
        epsilon: Rational,
        /// Largest height to tabulate.
        #[arg(long)]
        budget_n: usize,
        #[arg(long)]
        no_symmetry: bool,
    },
}

#[derive(Subcommand, Debug)]
enum CexCommand {
    /// The widened tree with the nodes avoiding digit 0 marked.
    Baire {
        #[arg(long, value_parser = parse_rational)]
        epsilon: Rational,
        /// Number of widened levels.
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 1 << 22)]
        max_level_size: u128,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The binary tree with dense cones at a fast-growing level sequence.
    Cantor {
        #[arg(long)]
        stages: usize,
        #[arg(long, default_value_t = 1 << 22)]
        max_level_size: u128,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks directly that no marked node has a marked fan of height 2.
    Verify {
        #[arg(long)]
        tree: PathBuf,
        /// Cross-check with the generic subtree search.
        #[arg(long)]
        search: bool,
    },
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Malformed(String),
    Write(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Malformed(_) => EXIT_MALFORMED,
            Failure::Write(_) => EXIT_WRITE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Malformed(m) | Failure::Write(m) => m,
        }
    }
}

fn malformed(e: impl std::fmt::Display) -> Failure {
    Failure::Malformed(e.to_string())
}

/// Report text and exit code of a successful invocation.
struct Report {
    text: String,
    code: u8,
}

impl Report {
    fn new() -> Self {
        Report { text: String::new(), code: EXIT_WITNESS }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }
}

/// Runs the command line on `args` (including the program name) and returns
/// the exit code; normal output goes to `out`, diagnostics to `err`.
pub fn run(args: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let _ = out.write_all(report.text.as_bytes());
            report.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn execute(cli: &Cli) -> Result<Report, Failure> {
    if cli.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let deadline = match cli.max_seconds {
        Some(s) if !(s.is_finite() && s >= 0.0) => return Err(Failure::Usage("--max-seconds must be a non-negative number".into())),
        Some(s) => Some(Instant::now() + Duration::from_secs_f64(s)),
        None => None,
    };
    let past_deadline = move || deadline.is_some_and(|d| Instant::now() >= d);
    let budget = Budget {
        max_expansions: cli.max_nodes,
        stop: deadline.map(|_| &past_deadline as &(dyn Fn() -> bool + Sync)),
    };
    let ctx = Ctx { budget, threads: cli.threads };
    match &cli.command {
        Command::Fans { action } => ctx.fans(action),
        Command::Subtree { action } => ctx.subtree(action),
        Command::Iso { from, to } => iso(from, to),
        Command::Correlate { action } => correlate(action),
        Command::Fubini { set, eta, level } => fubini(set, eta, *level),
        Command::Refine { set, subtree } => refine(set, subtree),
        Command::Hl { action: HlCommand::Search { coloring, k, out } } => ctx.hl_search(coloring, *k, out.as_deref()),
        Command::Dhl { action } => ctx.dhl(action),
        Command::Extract1d { set, epsilon, height, w_min, levels } => extract(set, epsilon, *height, *w_min, levels),
        Command::Cex { action } => ctx.cex(action),
        Command::Fw { set } => fw(set),
    }
}

struct Ctx<'a> {
    budget: Budget<'a>,
    threads: usize,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Malformed(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Write(format!("cannot write {}: {e}", path.display())))
}

fn in_file(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Malformed(format!("{}: {e}", path.display()))
}

fn read_set(path: &Path) -> Result<dhl_core::product::ProductSubset, Failure> {
    format::parse_set(&read(path)?).map_err(|e| in_file(path, e))
}

fn read_subtree(path: &Path) -> Result<SubtreeFile, Failure> {
    format::parse_subtree(&read(path)?).map_err(|e| in_file(path, e))
}

fn branching(shape: &Shape) -> Result<BranchingVector, Failure> {
    BranchingVector::new(shape.b.clone()).map_err(|e| Failure::Usage(e.to_string()))
}

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn element_text(e: &[Node]) -> String {
    format!("({})", e.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("|"))
}

/// The selection whose sections are read off the last coordinate of the set.
fn selection(path: &Path) -> Result<LevelSelection, Failure> {
    let d = read_set(path)?;
    let target = d.branching().dim().saturating_sub(1);
    section_selection(&d, target).map_err(|e| in_file(path, e))
}

/// Status word, witness body and expansion count of a search.
fn search_report(outcome: &SearchOutcome, branching: &BranchingVector, out: Option<&Path>, extra: Option<String>) -> Result<Report, Failure> {
    let mut r = Report::new();
    r.line(outcome.status_word());
    if let Some(w) = outcome.witness_ref() {
        r.text.push_str(&format::subtree_body(w));
        if let Some(extra) = extra {
            r.line(extra);
        }
        if let Some(path) = out {
            write(path, &format::emit_subtree(&SubtreeFile { branching: branching.clone(), subtree: w.clone() }))?;
        }
    }
    r.line(format!("expansions {}", outcome.stats.expansions));
    r.code = match outcome.outcome {
        Outcome::Witness(_) => EXIT_WITNESS,
        Outcome::ExhaustedNone => EXIT_NONE,
        Outcome::Unknown => EXIT_UNKNOWN,
    };
    Ok(r)
}

impl Ctx<'_> {
    fn fans(&self, action: &FansCommand) -> Result<Report, Failure> {
        let mut r = Report::new();
        match action {
            FansCommand::Count { shape, n, epsilon, target_branching } => {
                let b = branching(shape)?;
                if *n == 0 {
                    return Err(Failure::Usage("--n must be at least 1".into()));
                }
                r.line(format!("theta {}", theta(&b, *n)));
                r.line(format!("bounds {}", if theta_within_bounds(&b, *n) { "ok" } else { "violated" }));
                if let (Some(eps), Some(bw)) = (epsilon, target_branching) {
                    for (j, t) in theta_sequence(&b, eps, *bw, *n).iter().enumerate() {
                        r.line(format!("threshold {} {t}", j + 1));
                    }
                }
            }
            FansCommand::Enum { shape, n } => {
                let b = branching(shape)?;
                match enumerate_fans(&b, *n, self.budget) {
                    Ok(fans) => {
                        r.line(format!("count {}", fans.len()));
                        for (i, f) in fans.iter().enumerate() {
                            r.line(format!("fan {i}"));
                            r.text.push_str(&format::subtree_body(f));
                        }
                    }
                    Err(FanError::Budget(e)) => {
                        r.line("unknown");
                        r.line(format!("expansions {} produced {}", e.expansions, e.produced));
                        r.code = EXIT_UNKNOWN;
                    }
                    Err(e) => return Err(Failure::Usage(e.to_string())),
                }
            }
        }
        Ok(r)
    }

    fn subtree(&self, action: &SubtreeCommand) -> Result<Report, Failure> {
        let mut r = Report::new();
        match action {
            SubtreeCommand::Validate { file, height } => {
                let f = read_subtree(file)?;
                let hosts = f
                    .branching
                    .as_slice()
                    .iter()
                    .map(|&b| match height {
                        Some(h) => Homogeneous::truncated(b, *h),
                        None => Homogeneous::new(b),
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| in_file(file, e))?;
                match validate_vector(&hosts, &f.subtree) {
                    Ok(()) => r.line("ok"),
                    Err(violations) => {
                        r.line("invalid");
                        for (i, v) in violations {
                            r.line(format!("tree {i}: {v}"));
                        }
                        r.code = EXIT_NONE;
                    }
                }
            }
            SubtreeCommand::Enum { shape, n, k } => {
                let b = branching(shape)?;
                let hosts = b.hosts(*n);
                match enumerate_strong(&hosts, *n, *k, self.budget).map_err(|e| Failure::Usage(e.to_string()))? {
                    Ok(all) => {
                        r.line(format!("count {}", all.len()));
                        for (i, s) in all.iter().enumerate() {
                            r.line(format!("subtree {i}"));
                            r.text.push_str(&format::subtree_body(s));
                        }
                    }
                    Err(e) => {
                        r.line("unknown");
                        r.line(format!("expansions {} produced {}", e.expansions, e.produced));
                        r.code = EXIT_UNKNOWN;
                    }
                }
            }
        }
        Ok(r)
    }

    fn hl_search(&self, path: &Path, k: usize, out: Option<&Path>) -> Result<Report, Failure> {
        let c = format::parse_coloring(&read(path)?).map_err(|e| in_file(path, e))?;
        let hosts = c.branching().hosts(c.height());
        let space = SearchSpace::new(&hosts, c.height(), k).map_err(|e| Failure::Usage(e.to_string()))?;
        let outcome = first_witness(&space, &c, self.budget, self.threads).map_err(malformed)?;
        let color = outcome.witness_ref().and_then(|w| c.color(&w.root())).map(|x| format!("color {x}"));
        search_report(&outcome, c.branching(), out, color)
    }

    fn dhl(&self, action: &DhlCommand) -> Result<Report, Failure> {
        match action {
            DhlCommand::Search { set, k, out } => {
                let d = read_set(set)?;
                let hosts = d.branching().hosts(d.height());
                let space = SearchSpace::new(&hosts, d.height(), *k).map_err(|e| Failure::Usage(e.to_string()))?;
                let outcome = first_witness(&space, &d, self.budget, self.threads).map_err(malformed)?;
                search_report(&outcome, d.branching(), out.as_deref(), None)
            }
            DhlCommand::Extremal { shape, n, k, no_symmetry, out } => {
                let b = branching(shape)?;
                let options = ExtremalOptions { symmetry: !no_symmetry };
                let mut r = Report::new();
                match avoidance_extremal(&b, *n, *k, options, None, self.budget).map_err(|e| Failure::Usage(e.to_string()))? {
                    Some(ex) => {
                        r.line(format!("f {}", ex.value));
                        r.line(format!("expansions {}", ex.expansions));
                        if let Some(path) = out {
                            write(path, &format::emit_set(&ex.witness))?;
                        }
                    }
                    None => {
                        r.line("unknown");
                        r.code = EXIT_UNKNOWN;
                    }
                }
                Ok(r)
            }
            DhlCommand::Number { shape, k, epsilon, budget_n, no_symmetry } => {
                let b = branching(shape)?;
                if !epsilon.is_positive() || epsilon > &Rational::one() {
                    return Err(Failure::Usage("--epsilon must lie in (0, 1]".into()));
                }
                let options = ExtremalOptions { symmetry: !no_symmetry };
                let report = dhl_number(epsilon, *k, &b, *budget_n, options, self.budget).map_err(|e| Failure::Usage(e.to_string()))?;
                let mut r = Report::new();
                r.line(report.number.to_string());
                for (n, v) in &report.table {
                    r.line(format!("f {n} {v}"));
                }
                if matches!(report.number, DhlNumber::AtLeast(_)) {
                    r.code = EXIT_UNKNOWN;
                }
                Ok(r)
            }
        }
    }

    fn cex(&self, action: &CexCommand) -> Result<Report, Failure> {
        let mut r = Report::new();
        match action {
            CexCommand::Baire { epsilon, depth, max_level_size, out } => {
                let inst = baire_example(epsilon, *depth, *max_level_size).map_err(|e| Failure::Usage(e.to_string()))?;
                r.line(format!("widths {}", join(&inst.widths)));
                let sum = baire_reciprocal_sum(&inst.widths);
                r.line(format!("reciprocal-sum {sum}"));
                let bound = &Rational::one() - epsilon;
                for n in 1..=*depth {
                    let dens = inst.marked.level_density(n).map_err(malformed)?;
                    let ok = dens >= bound;
                    r.line(format!("level {n} density {dens} bound {bound} {}", if ok { "ok" } else { "below" }));
                }
                if let Some(path) = out {
                    write(path, &format::emit_tree(&inst.marked))?;
                }
            }
            CexCommand::Cantor { stages, max_level_size, out } => {
                let inst = cantor_example(*stages, *max_level_size).map_err(|e| Failure::Usage(e.to_string()))?;
                r.line(format!("levels {}", join(&inst.levels)));
                r.line(format!("sizes {}", join(&inst.sizes)));
                for k in 0..*stages {
                    let level = inst.levels[k + 1];
                    let dens = inst.marked.level_density(level).map_err(malformed)?;
                    let bound = cantor_density_bound(k);
                    r.line(format!("level {level} density {dens} bound {bound} {}", if dens >= bound { "ok" } else { "below" }));
                }
                if let Some(path) = out {
                    write(path, &format::emit_tree(&inst.marked))?;
                }
            }
            CexCommand::Verify { tree, search } => {
                let m = format::parse_tree(&read(tree)?).map_err(|e| in_file(tree, e))?;
                match verify_no_height2(&m).map_err(malformed)? {
                    NoFanCertificate::None { depth, roots, pairs } => {
                        r.line(format!("certified-none height-2 depth {depth}"));
                        r.line(format!("roots {roots} pairs {pairs}"));
                        r.code = EXIT_NONE;
                    }
                    NoFanCertificate::Found(s) => {
                        r.line("witness");
                        r.text.push_str(&format::subtree_body(&VectorStrongSubtree::single(s)));
                    }
                }
                if *search {
                    let outcome = marked_witness_search(&m, 2, self.budget).map_err(malformed)?;
                    r.line(format!("search {} expansions {}", outcome.status_word(), outcome.stats.expansions));
                }
            }
        }
        Ok(r)
    }
}

fn iso(from: &Path, to: &Path) -> Result<Report, Failure> {
    let a = read_subtree(from)?;
    let b = read_subtree(to)?;
    if a.subtree.dim() != b.subtree.dim() {
        return Err(Failure::Malformed(format!("dimension {} against {}", a.subtree.dim(), b.subtree.dim())));
    }
    let mut r = Report::new();
    for (i, (x, y)) in a.subtree.coords().iter().zip(b.subtree.coords()).enumerate() {
        let map = canonical_isomorphism(x, y).map_err(|e| Failure::Malformed(format!("tree {i}: {e}")))?;
        for (s, t) in map.pairs() {
            r.line(format!("tree {i}: {s} -> {t}"));
        }
    }
    Ok(r)
}

fn correlate(action: &CorrelateCommand) -> Result<Report, Failure> {
    let mut r = Report::new();
    match action {
        CorrelateCommand::Check { set, subtree, w, theta } => {
            let d = selection(set)?;
            let rt = read_subtree(subtree)?.subtree;
            let w = Node::parse(w, d.target_branching() <= 10).map_err(|e| Failure::Usage(e.to_string()))?;
            match is_strongly_correlated(&d, &rt, &w, theta).map_err(malformed)? {
                Correlation::Correlated { min } => {
                    r.line("correlated");
                    if let Some(min) = min {
                        r.line(format!("min-density {min}"));
                    }
                }
                Correlation::NotInRootSection => {
                    r.line("not-correlated root-section");
                    r.code = EXIT_NONE;
                }
                Correlation::FanBelow { direction, fan, density } => {
                    r.line(format!("not-correlated direction {direction} density {density}"));
                    r.text.push_str(&format::subtree_body(&fan));
                    r.code = EXIT_NONE;
                }
            }
        }
        CorrelateCommand::Set { set, subtree, theta } => {
            let d = selection(set)?;
            let rt = read_subtree(subtree)?.subtree;
            let c = correlated_set(&d, &rt, theta).map_err(malformed)?;
            r.line(format!("level {}", c.level()));
            r.line(format!("size {}", c.len()));
            r.line(format!("nodes: {}", join(c.nodes())));
        }
    }
    Ok(r)
}

fn fubini(set: &Path, eta: &Rational, level: usize) -> Result<Report, Failure> {
    let d = selection(set)?;
    let report = fubini_majority(&d, eta, level).map_err(malformed)?;
    let mut r = Report::new();
    r.line(format!("sources {}", report.sources));
    r.line(format!("level {}", report.majority.level()));
    r.line(format!("majority: {}", join(report.majority.nodes())));
    r.line(format!("density {}", report.density));
    Ok(r)
}

fn refine(set: &Path, subtree: &Path) -> Result<Report, Failure> {
    let d = selection(set)?;
    let rt = read_subtree(subtree)?.subtree;
    let refined = refine_selection(&d, &rt).map_err(malformed)?;
    let mut r = Report::new();
    r.text.push_str(&format::subtree_body(refined.source()));
    r.line(format!("target-levels: {}", join(refined.target_levels())));
    let mut min: Option<Rational> = None;
    for (e, sec) in refined.sections() {
        r.line(format!("section {}: {}", element_text(e), join(sec)));
        if let Some(v) = refined.section_density(e) {
            min = Some(min.map_or(v.clone(), |m| m.min(v)));
        }
    }
    if let Some(min) = min {
        r.line(format!("min-density {min}"));
    }
    Ok(r)
}

fn extract(set: &Path, epsilon: &Rational, height: usize, w_min: usize, levels: &[usize]) -> Result<Report, Failure> {
    let d = read_set(set)?;
    if d.branching().dim() != 1 {
        return Err(in_file(set, "extraction needs a one-dimensional set"));
    }
    let b = d.branching().as_slice()[0];
    let chosen: Vec<usize> = if levels.is_empty() {
        (0..d.height()).filter(|&m| &d.level_density(m) >= epsilon).collect()
    } else {
        levels.to_vec()
    };
    if let Some(&m) = chosen.iter().find(|&&m| m >= d.height()) {
        return Err(Failure::Usage(format!("level {m} is not below the height {}", d.height())));
    }
    let subsets: Vec<LevelSubset> = chosen
        .iter()
        .map(|&m| LevelSubset::from_sorted(m, d.level_elements(m).into_iter().map(|mut e| e.remove(0)).collect()))
        .collect();
    let report = extract_1d(b, &subsets, epsilon, height, w_min).map_err(malformed)?;
    let mut r = Report::new();
    r.line(format!("levels {}", join(&chosen)));
    r.line(format!("thresholds {}", join(&report.thresholds)));
    r.line(format!("window {}", report.window));
    for s in &report.stages {
        let threshold = s.threshold.as_ref().map_or("-".to_string(), |t| t.to_string());
        r.line(format!(
            "stage {} level {} threshold {threshold} checked {} nodes: {}",
            s.stage,
            s.level,
            join(&s.checked_levels),
            join(&s.nodes)
        ));
    }
    match report.result {
        ExtractResult::Witness(s) => {
            r.line("witness");
            r.text.push_str(&format::subtree_body(&VectorStrongSubtree::single(s)));
        }
        ExtractResult::Failed { stage, threshold } => {
            let threshold = threshold.map_or("-".to_string(), |t| t.to_string());
            r.line(format!("failed stage {stage} threshold {threshold}"));
            r.code = EXIT_UNKNOWN;
        }
    }
    Ok(r)
}

fn fw(set: &Path) -> Result<Report, Failure> {
    let d = read_set(set)?;
    let mut r = Report::new();
    for l in level_density_profile(&d) {
        let chain = l.chain_density.map_or("-".to_string(), |c| c.to_string());
        r.line(format!("level {} density {} initial {} chain {chain}", l.level, l.level_density, l.initial_density));
    }
    Ok(r)
}

