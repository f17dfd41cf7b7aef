//! `mfj`: check, run and test programs of the calculus from the command line.
//!
//! Exit codes: 0 on success, 1 when a check or soundness property fails,
//! 2 on usage errors and unmet preconditions.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mfj_core::evaluator::{Finitary, Machine, Res, DEFAULT_FUEL, DEFAULT_PREFIX};
use mfj_core::monads::{Dist, Exc, Id, List, Monad, Ordered, Registry, Shape};
use mfj_core::soundness::{self, HarnessError, Interp, Options, Report};
use mfj_core::{parse_source, parse_source_with, Checker, Diagnostic, Printer, Source};
use serde_json::json;

/// Values grow one level per loop iteration, and reduction, substitution
/// and printing recurse over them; long runs need far more than the
/// default thread stack.
const WORKER_STACK: usize = 1 << 30;

#[derive(Parser, Debug)]
#[command(name = "mfj", version, about = "Type-check, run and test Monadic Featherweight Java programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Type-check programs and print rule-tagged diagnostics.
    Check(Common),
    /// Run `main` and print its monadic result.
    Run(Common),
    /// Run `main` under effect interpretations and check the soundness
    /// properties on every step.
    Soundness(Common),
    /// Parse programs and print them back.
    Parse(Common),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MonadArg {
    Exc,
    List,
    Dist,
    Id,
}

impl MonadArg {
    fn name(self) -> &'static str {
        match self {
            MonadArg::Exc => "exc",
            MonadArg::List => "list",
            MonadArg::Dist => "dist",
            MonadArg::Id => "id",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Quantifier {
    Forall,
    Exists,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    files: Vec<PathBuf>,
    /// The monad to run in. `run` defaults to exc; `soundness` defaults to
    /// every built-in interpretation.
    #[arg(long, value_enum)]
    monad: Option<MonadArg>,
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: usize,
    /// How many list elements to observe.
    #[arg(long, default_value_t = DEFAULT_PREFIX)]
    prefix: usize,
    /// `run`: print the approximation chain up to this step.
    /// `soundness`: check approximations up to this step (default 64).
    #[arg(long)]
    approx: Option<usize>,
    /// Interpretation variant for list and dist; both when omitted.
    #[arg(long, value_enum)]
    interp: Option<Quantifier>,
    /// Print the reduction trace.
    #[arg(long)]
    trace: bool,
    /// Machine-readable output, one JSON value per line.
    #[arg(long)]
    json: bool,
    /// Run without type-checking first.
    #[arg(long)]
    unchecked: bool,
    /// Do not include the standard declarations.
    #[arg(long)]
    no_prelude: bool,
    /// Use run functions that break their declared types.
    #[arg(long, hide = true)]
    corrupt_registry: bool,
}

/// What one file contributes: its printed output and exit code.
struct FileOutput {
    text: String,
    code: u8,
}

impl FileOutput {
    fn new() -> Self {
        FileOutput { text: String::new(), code: 0 }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn fail(&mut self, code: u8) {
        self.code = self.code.max(code);
    }
}

type Cmd = fn(&Common, &Path, &Source) -> FileOutput;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args): (Cmd, &Common) = match &cli.command {
        Command::Check(a) => (check, a),
        Command::Run(a) => (run, a),
        Command::Soundness(a) => (sound, a),
        Command::Parse(a) => (parse, a),
    };
    if args.files.is_empty() {
        eprintln!("error: no input files");
        return ExitCode::from(2);
    }
    if let Err(msg) = validate(&cli.command, args) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let base = match load_prelude(args) {
        Ok(b) => b,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    // Check output names the file on every line already.
    let header = args.files.len() > 1 && !args.json && !matches!(cli.command, Command::Check(_));
    // A soundness check presupposes a well-typed program, so unparsable
    // input is a precondition failure there.
    let parse_code = if matches!(cli.command, Command::Soundness(_)) { 2 } else { 1 };
    let outputs: Vec<FileOutput> = std::thread::scope(|s| {
        let handles: Vec<_> = args
            .files
            .iter()
            .map(|f| {
                let base = &base;
                std::thread::Builder::new()
                    .stack_size(WORKER_STACK)
                    .spawn_scoped(s, move || process(cmd, args, base, f, header, parse_code))
                    .expect("spawn worker thread")
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker thread")).collect()
    });
    let mut code = 0;
    for o in &outputs {
        print!("{}", o.text);
        code = code.max(o.code);
    }
    ExitCode::from(code)
}

fn validate(cmd: &Command, a: &Common) -> Result<(), String> {
    if a.monad == Some(MonadArg::Id) && a.approx.is_some() {
        return Err("the id monad has no approximation order".into());
    }
    if matches!(cmd, Command::Soundness(_)) && a.monad == Some(MonadArg::Id) {
        return Err("no interpretation is defined for the id monad".into());
    }
    Ok(())
}

fn load_prelude(a: &Common) -> Result<Option<Source>, String> {
    if a.no_prelude {
        return Ok(None);
    }
    match std::env::var_os("MFJ_PRELUDE") {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", Path::new(&path).display()))?;
            parse_source(&text).map(Some).map_err(|e| format!("{}: {e}", Path::new(&path).display()))
        }
        None => Ok(Some(mfj_core::prelude())),
    }
}

fn process(
    cmd: Cmd,
    a: &Common,
    base: &Option<Source>,
    f: &Path,
    header: bool,
    parse_code: u8,
) -> FileOutput {
    let parsed = std::fs::read_to_string(f).map_err(|e| ("IoError", e.to_string())).and_then(|text| {
        match base {
            Some(b) => parse_source_with(b, &text),
            None => parse_source(&text),
        }
        .map_err(|e| ("ParseError", e.to_string()))
    });
    let mut out = match parsed {
        Ok(src) => cmd(a, f, &src),
        Err((code, msg)) => {
            let mut o = FileOutput::new();
            if a.json {
                o.line(json!({"file": f.display().to_string(), "code": code, "msg": msg}).to_string());
            } else {
                o.line(format!("{}: {code}: {msg}", f.display()));
            }
            o.fail(if code == "IoError" { 2 } else { parse_code });
            o
        }
    };
    if header && !out.text.is_empty() {
        out.text = format!("# {}\n{}", f.display(), out.text);
    }
    out
}

fn diagnostic_line(f: &Path, d: &Diagnostic) -> String {
    let pos = match (d.line, d.col) {
        (Some(l), Some(c)) => format!(":{l}:{c}"),
        _ => String::new(),
    };
    format!("{}{pos}: {} [{}] in {}: {}", f.display(), d.code, d.rule, d.loc, d.msg)
}

fn check(a: &Common, f: &Path, src: &Source) -> FileOutput {
    let mut o = FileOutput::new();
    let diags = Checker::new(&src.program).check_source(src);
    for d in &diags {
        if a.json {
            let mut v = serde_json::to_value(d).expect("diagnostics serialize");
            v["file"] = json!(f.display().to_string());
            o.line(v.to_string());
        } else {
            o.line(diagnostic_line(f, d));
            if a.trace && !d.trace.is_empty() {
                o.line(format!("  rules: {}", d.trace.join(" > ")));
            }
        }
    }
    if diags.is_empty() {
        if a.json {
            o.line(json!({"file": f.display().to_string(), "ok": true}).to_string());
        } else {
            o.line(format!("{}: ok", f.display()));
        }
    } else {
        o.fail(1);
    }
    o
}

fn parse(a: &Common, f: &Path, src: &Source) -> FileOutput {
    let mut o = FileOutput::new();
    let text = Printer::folding(&src.aliases).source(src);
    if a.json {
        o.line(json!({"file": f.display().to_string(), "source": text}).to_string());
    } else {
        o.text.push_str(&text);
        if !text.ends_with('\n') {
            o.text.push('\n');
        }
    }
    o
}

/// Type-check unless `--unchecked`; on failure the diagnostics are the output.
fn precheck(a: &Common, f: &Path, src: &Source, o: &mut FileOutput) -> bool {
    if a.unchecked {
        return true;
    }
    let diags = Checker::new(&src.program).check_source(src);
    for d in &diags {
        o.line(if a.json { serde_json::to_string(d).expect("diagnostics serialize") } else { diagnostic_line(f, d) });
    }
    if !diags.is_empty() {
        o.fail(1);
    }
    diags.is_empty()
}

fn run(a: &Common, f: &Path, src: &Source) -> FileOutput {
    let mut o = FileOutput::new();
    if src.main.is_none() {
        o.line(format!("{}: no main expression", f.display()));
        o.fail(2);
        return o;
    }
    if !precheck(a, f, src, &mut o) {
        return o;
    }
    match a.monad.unwrap_or(MonadArg::Exc) {
        MonadArg::Exc => run_in::<Exc>(a, f, src, &mut o, approx_of::<Exc>),
        MonadArg::List => run_in::<List>(a, f, src, &mut o, approx_of::<List>),
        MonadArg::Dist => run_in::<Dist>(a, f, src, &mut o, approx_of::<Dist>),
        MonadArg::Id => run_in::<Id>(a, f, src, &mut o, |_, _, _| Vec::new()),
    }
    o
}

fn approx_of<M: Ordered>(m: &Machine<M>, src: &Source, n: usize) -> Vec<Shape<Res>> {
    m.approx_chain(src.main.as_ref().expect("checked"), n).iter().map(|x| M::shape(x, m.prefix)).collect()
}

fn show_res(printer: &Printer, r: &Res) -> String {
    match r {
        Res::Value(v) => printer.value(v),
        Res::Wrong(_) => "wrong".into(),
    }
}

fn run_in<M: Monad>(
    a: &Common,
    f: &Path,
    src: &Source,
    o: &mut FileOutput,
    approx: impl Fn(&Machine<M>, &Source, usize) -> Vec<Shape<Res>>,
) {
    let registry = if a.corrupt_registry { Registry::corrupted() } else { Registry::standard() };
    let m = Machine::<M>::new(src.program.clone(), registry).with_prefix(a.prefix);
    let printer = Printer::folding(&src.aliases);
    let main = src.main.as_ref().expect("checked");
    let file = f.display().to_string();
    if a.trace {
        for l in m.trace(&printer, main, a.fuel) {
            o.line(if a.json { json!({"file": file, "trace": l}).to_string() } else { l });
        }
    }
    if let Some(n) = a.approx {
        for (i, s) in approx(&m, src, n).iter().enumerate() {
            o.line(if a.json {
                json!({"file": file, "approx": i, "result": s.to_json(M::NAME, |r| show_res(&printer, r))}).to_string()
            } else {
                format!("approx {i}: {}", s.display(|r| show_res(&printer, r)))
            });
        }
    }
    match m.finitary(main, a.fuel) {
        Finitary::Finite { result, steps } => {
            let s = M::shape(&result, a.prefix);
            if a.json {
                o.line(
                    json!({"file": file, "steps": steps, "result": s.to_json(M::NAME, |r| show_res(&printer, r))}).to_string(),
                );
            } else {
                o.line(s.display(|r| show_res(&printer, r)));
            }
            let reasons = m.wrong_reasons(&result);
            for r in &reasons {
                o.line(if a.json { json!({"file": file, "wrong": r}).to_string() } else { format!("wrong: {r}") });
            }
            if !reasons.is_empty() {
                o.fail(1);
            }
        }
        Finitary::Diverged { fuel } => {
            o.line(if a.json {
                json!({"file": file, "diverged": true, "fuel": fuel}).to_string()
            } else {
                format!("diverged (fuel={fuel})")
            });
        }
    }
}

fn interps(a: &Common) -> Vec<Interp> {
    let monads: Vec<&str> = match a.monad {
        Some(m) => vec![m.name()],
        None => vec!["exc", "list", "dist"],
    };
    let mut out = Vec::new();
    for m in monads {
        match a.interp {
            Some(Quantifier::Forall) => out.extend(Interp::select(m, "forall")),
            Some(Quantifier::Exists) => out.extend(Interp::select(m, "exists")),
            None => out.extend(Interp::for_monad(m)),
        }
    }
    out.dedup();
    out
}

fn sound(a: &Common, f: &Path, src: &Source) -> FileOutput {
    let mut o = FileOutput::new();
    let file = f.display().to_string();
    let Some(main) = src.main.as_ref() else {
        o.line(format!("{file}: no main expression"));
        o.fail(2);
        return o;
    };
    let printer = Printer::folding(&src.aliases);
    let opts = Options { fuel: a.fuel, prefix: a.prefix, approx: a.approx.unwrap_or(64) };
    let explicit = a.monad.is_some();
    let mut ran = 0;
    let mut skipped = Vec::new();
    for interp in interps(a) {
        let r = if a.corrupt_registry {
            soundness::check_program_corrupted(&src.program, main, interp, &opts, &printer)
        } else {
            soundness::check_program(&src.program, main, interp, &opts, &printer)
        };
        match r {
            Ok(report) => {
                ran += 1;
                if !report.passed() {
                    o.fail(1);
                }
                report_lines(a, &file, &report, &mut o);
            }
            Err(HarnessError::NotApplicable(why)) => skipped.push(format!("{interp}: {why}")),
            Err(e) => {
                o.line(if a.json { json!({"file": file, "error": e.to_string()}).to_string() } else { format!("{file}: {e}") });
                o.fail(2);
                return o;
            }
        }
    }
    for s in &skipped {
        o.line(if a.json {
            json!({"file": file, "skipped": s}).to_string()
        } else {
            format!("{file}: skipped {s}")
        });
    }
    if ran == 0 || (explicit && !skipped.is_empty()) {
        o.fail(2);
    }
    o
}

fn report_lines(a: &Common, file: &str, r: &Report, o: &mut FileOutput) {
    if a.json {
        let mut v = serde_json::to_value(r).expect("reports serialize");
        v["file"] = json!(file);
        v["passed"] = json!(r.passed());
        o.line(v.to_string());
        return;
    }
    o.line(format!(
        "{file} [{}]: {} : {} ! {}, {} after {} steps{}",
        r.interp,
        if r.passed() { "PASS" } else { "FAIL" },
        r.ty,
        r.effect,
        r.outcome,
        r.steps,
        r.result.as_deref().map(|s| format!(", result {s}")).unwrap_or_default()
    ));
    for c in &r.checks {
        let mut l = format!("  {:<22}{} ({} checked)", c.theorem, if c.pass { "pass" } else { "FAIL" }, c.checked);
        if let Some(w) = &c.witness {
            l.push_str(&format!(": {w}"));
        }
        o.line(l);
    }
}
