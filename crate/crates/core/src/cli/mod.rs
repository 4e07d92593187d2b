//! The `ucrc` command line.

pub mod cxfile;
pub mod manifest;

use crate::behavior::{behav, Environment};
use crate::emulation::{
    check_pred_rhc, check_pred_rhp, cross_check_theorems, verify_emulation, Ceilings, Compiler,
    EmulationCase, EmulationError, Evaluator, Named, Universe,
};
use crate::equivalence::{EnvClass, EquivKind, EquivSpec};
use crate::lang::{
    has_errors, link_pair, parse_program, validate_among, Diagnostic, OracleProgram,
};
use crate::primitives::{permutation_hex, MAX_TABLE_WIDTH};
use crate::semantics::{Budget, Executable};
use clap::{Args, Parser, Subcommand};
use cxfile::{replay, CounterexampleFile, ReplayError, WorldSource};
use manifest::{parse_grid, ClassDecl, Manifest};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    PropertyFails = 1,
    InvalidModel = 2,
    Io = 3,
    Ceiling = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    fn new(exit: Exit, message: impl Into<String>) -> CliError {
        CliError {
            exit,
            message: message.into(),
        }
    }
}

impl From<EmulationError> for CliError {
    fn from(e: EmulationError) -> CliError {
        let exit = if e.is_ceiling() {
            Exit::Ceiling
        } else {
            Exit::InvalidModel
        };
        CliError::new(exit, e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ucrc",
    version,
    about = "Exact-enumeration workbench for UC emulation and robust compilation"
)]
pub struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Limits {
    /// Largest call space a bounded environment class may range over.
    #[arg(long, default_value_t = 1024)]
    pub max_calls: u128,
    /// Largest number of context-program pairs per language.
    #[arg(long, default_value_t = Ceilings::default().pairs)]
    pub max_pairs: u128,
    /// Largest number of environment runs per language.
    #[arg(long, default_value_t = Ceilings::default().runs)]
    pub max_runs: u128,
    /// Largest number of compiler maps.
    #[arg(long, default_value_t = Ceilings::default().compilers)]
    pub max_compilers: u128,
}

impl Limits {
    fn ceilings(&self) -> Ceilings {
        Ceilings {
            pairs: self.max_pairs,
            runs: self.max_runs,
            compilers: self.max_compilers,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse, validate and link a model file or every file of a manifest.
    Check { path: PathBuf },
    /// Print the trace distribution of a context linked with a program.
    Behav {
        context: PathBuf,
        program: PathBuf,
        /// Environment files.
        #[arg(long = "env", required = true)]
        envs: Vec<PathBuf>,
        #[arg(long, default_value = "1..2")]
        grid: String,
        #[arg(long, default_value = "none")]
        budget: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a manifest's protocol emulates its functionality.
    Emulate {
        manifest: PathBuf,
        #[arg(long)]
        grid: Option<String>,
        /// perfect | stat:<eps> | comp:c=<c>,N=<N> | refine
        #[arg(long)]
        equiv: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Decide both robust compilation criteria for a manifest's compiler.
    CompilerCheck {
        manifest: PathBuf,
        #[arg(long)]
        equiv: Option<String>,
        /// Overrides the manifest's compiler, e.g. `coin->notcoin,notcoin->coin`.
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Cross-check the criteria and the emulation-set characterisation over every compiler map.
    Theorems {
        manifest: PathBuf,
        #[arg(long)]
        equiv: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Re-run a counterexample file and confirm its recorded advantage.
    Replay { file: PathBuf },
}

/// Header of every report.
pub fn report_header(command: &str, subject: &str, extra: &str) -> String {
    format!(
        "# ucrc report\n\
         # assumption: environments are deterministic decision trees; Axiom 3 (randomised environments add no power) is assumed, not checked\n\
         # gap: verdicts quantify over the stated environment class only; a bounded class stands in for all efficient environments\n\
         # command={command} subject={subject} {extra}\n"
    )
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::new(Exit::Io, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(d) = path.parent() {
        fs::create_dir_all(d)
            .map_err(|e| CliError::new(Exit::Io, format!("{}: {e}", d.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::new(Exit::Io, format!("{}: {e}", path.display())))
}

fn parse_file(path: &Path) -> Result<(String, OracleProgram), CliError> {
    let src = read(path)?;
    let p = parse_program(&src)
        .map_err(|e| CliError::new(Exit::InvalidModel, format!("{}: {e}", path.display())))?;
    Ok((src, p))
}

fn render(path: &Path, diags: &[Diagnostic]) -> Vec<String> {
    diags
        .iter()
        .map(|d| d.render(&path.display().to_string()))
        .collect()
}

/// A loaded model: its source text and parsed program.
#[derive(Clone, Debug)]
struct Loaded {
    src: String,
    named: Named,
}

fn load_all(paths: &[PathBuf], out: &mut Vec<String>) -> Result<Vec<Loaded>, CliError> {
    let mut parsed = Vec::new();
    for p in paths {
        let (src, prog) = parse_file(p)?;
        parsed.push((p.clone(), src, prog));
    }
    let mut loaded = Vec::new();
    let mut errors = 0;
    for (i, (path, src, prog)) in parsed.iter().enumerate() {
        let others: Vec<&OracleProgram> = parsed
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (_, _, q))| q)
            .collect();
        let diags = validate_among(prog, &others);
        out.extend(render(path, &diags));
        if has_errors(&diags) {
            errors += 1;
        }
        loaded.push(Loaded {
            src: src.clone(),
            named: Named::new(prog.name.clone(), prog.clone()),
        });
    }
    if errors > 0 {
        return Err(CliError::new(
            Exit::InvalidModel,
            format!(
                "{} of {} model files have errors\n{}",
                errors,
                paths.len(),
                out.join("\n")
            ),
        ));
    }
    Ok(loaded)
}

fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = read(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    Manifest::parse(&text, dir)
        .map_err(|e| CliError::new(Exit::InvalidModel, format!("{}: {e}", path.display())))
}

fn grid_arg(s: &Option<String>, default: &[u32]) -> Result<Vec<u32>, CliError> {
    match s {
        None => Ok(default.to_vec()),
        Some(g) => parse_grid(g)
            .ok_or_else(|| CliError::new(Exit::InvalidModel, format!("bad grid `{g}`"))),
    }
}

fn equiv_arg(s: &Option<String>, default: Option<&EquivKind>) -> Result<EquivKind, CliError> {
    match (s, default) {
        (Some(e), _) => {
            EquivKind::parse(e).map_err(|e| CliError::new(Exit::InvalidModel, e.to_string()))
        }
        (None, Some(k)) => Ok(k.clone()),
        (None, None) => Ok(EquivKind::Perfect),
    }
}

fn load_envs(files: &[PathBuf]) -> Result<Vec<Environment>, CliError> {
    files
        .iter()
        .map(|f| {
            Environment::parse(&read(f)?)
                .map_err(|e| CliError::new(Exit::InvalidModel, format!("{}: {e}", f.display())))
        })
        .collect()
}

fn env_class(m: &Manifest, ceiling: u128) -> Result<EnvClass, CliError> {
    match &m.class {
        None => Err(CliError::new(Exit::InvalidModel, "manifest has no `class`")),
        Some(ClassDecl::Bounded { depth, view, calls }) => Ok(EnvClass::Bounded {
            depth: *depth,
            view: *view,
            calls: calls.clone(),
        }),
        Some(ClassDecl::Explicit(files)) => Ok(EnvClass::Explicit(Arc::new(load_envs(files)?))),
        Some(ClassDecl::Alphabet { depth, alphabet }) => Ok(EnvClass::Explicit(Arc::new(
            alphabet
                .enumerate(*depth, ceiling)
                .map_err(|e| CliError::new(Exit::Ceiling, e.to_string()))?,
        ))),
    }
}

fn check(path: &Path) -> Result<(Exit, Vec<String>), CliError> {
    let mut out = Vec::new();
    if path.extension().is_some_and(|e| e == "ocl") {
        let (_, prog) = parse_file(path)?;
        let diags = validate_among(&prog, &[]);
        out.extend(render(path, &diags));
        let errs = diags.iter().filter(|d| d.is_error()).count();
        let status = if errs == 0 { "pass" } else { "fail" };
        out.push(format!(
            "check=validate:{} status={status} detail=errors={errs} warnings={}",
            prog.name,
            diags.len() - errs
        ));
        return Ok((
            if errs == 0 {
                Exit::Pass
            } else {
                Exit::InvalidModel
            },
            out,
        ));
    }
    let m = read_manifest(path)?;
    let files = m.model_files();
    let loaded = match load_all(&files, &mut out) {
        Ok(l) => l,
        Err(e) if e.exit == Exit::InvalidModel => {
            out.push(format!(
                "check=validate:{} status=fail detail={}",
                m.name,
                e.message.lines().next().unwrap_or("")
            ));
            return Ok((Exit::InvalidModel, out));
        }
        Err(e) => return Err(e),
    };
    let by_path =
        |p: &PathBuf| &loaded[files.iter().position(|f| f == p).expect("file was loaded")].named;
    let mut pairs: Vec<(&Named, &Named)> = Vec::new();
    if let Some(p) = &m.protocol {
        for a in &m.attackers {
            pairs.push((by_path(a), by_path(p)));
        }
    }
    if let Some(f) = &m.functionality {
        for s in &m.simulators {
            pairs.push((by_path(s), by_path(f)));
        }
    }
    for (ctxs, prgs) in [
        (&m.source_contexts, &m.source_programs),
        (&m.target_contexts, &m.target_programs),
    ] {
        for c in ctxs {
            for p in prgs {
                pairs.push((by_path(c), by_path(p)));
            }
        }
    }
    let mut bad = Vec::new();
    for (c, p) in &pairs {
        let r = link_pair(&c.program, &p.program)
            .map_err(|e| e.to_string())
            .and_then(|w| Executable::new(&w).map_err(|e| e.to_string()));
        if let Err(e) = r {
            bad.push(format!("{}|{}: {e}", c.name, p.name));
        }
    }
    if let Some(ClassDecl::Explicit(files)) = &m.class {
        if let Err(e) = load_envs(files) {
            if e.exit == Exit::Io {
                return Err(e);
            }
            bad.push(e.message);
        }
    }
    let status = if bad.is_empty() { "pass" } else { "fail" };
    out.push(format!(
        "check=manifest:{} status={status} detail=models={} links={}{}",
        m.name,
        files.len(),
        pairs.len(),
        if bad.is_empty() {
            String::new()
        } else {
            format!(" errors={}", bad.join("; "))
        }
    ));
    Ok((
        if bad.is_empty() {
            Exit::Pass
        } else {
            Exit::InvalidModel
        },
        out,
    ))
}

fn behav_cmd(
    context: &Path,
    program: &Path,
    envs: &[PathBuf],
    grid: &str,
    budget: &str,
    out_dir: &Option<PathBuf>,
) -> Result<(Exit, Vec<String>), CliError> {
    let mut out = Vec::new();
    let loaded = load_all(&[context.to_path_buf(), program.to_path_buf()], &mut out)?;
    let grid = parse_grid(grid)
        .ok_or_else(|| CliError::new(Exit::InvalidModel, format!("bad grid `{grid}`")))?;
    let budget = Budget::parse(budget)
        .ok_or_else(|| CliError::new(Exit::InvalidModel, format!("bad budget `{budget}`")))?;
    let w = link_pair(&loaded[0].named.program, &loaded[1].named.program)
        .map_err(|e| CliError::new(Exit::InvalidModel, e.to_string()))?;
    let exe = Executable::new(&w).map_err(|e| CliError::new(Exit::InvalidModel, e.to_string()))?;
    let envs = Arc::new(load_envs(envs)?);
    let b = behav(&exe, envs.clone(), &grid, budget)
        .map_err(|e| CliError::new(Exit::InvalidModel, e.to_string()))?;
    for (e, env) in envs.iter().enumerate() {
        out.push(format!("# env {}", env.name));
        for d in &b.slices[e] {
            out.extend(d.lines());
        }
    }
    if let Some(dir) = out_dir {
        write(&dir.join("traces.txt"), &(out.join("\n") + "\n"))?;
    }
    Ok((Exit::Pass, out))
}

fn export_tables(dir: &Path, grid: &[u32]) -> Result<(), CliError> {
    for &n in grid.iter().filter(|&&n| n <= MAX_TABLE_WIDTH) {
        write(&dir.join(format!("perm-w{n}.hex")), &permutation_hex(n))?;
    }
    Ok(())
}

fn emulate(
    path: &Path,
    grid: &Option<String>,
    equiv: &Option<String>,
    out_dir: &Option<PathBuf>,
    limits: &Limits,
) -> Result<(Exit, Vec<String>), CliError> {
    let m = read_manifest(path)?;
    let grid = grid_arg(grid, &m.grid)?;
    let kind = equiv_arg(equiv, m.equiv.as_ref())?;
    let need = |p: &Option<PathBuf>, what: &str| {
        p.clone()
            .ok_or_else(|| CliError::new(Exit::InvalidModel, format!("manifest has no `{what}`")))
    };
    let (proto, func) = (
        need(&m.protocol, "protocol")?,
        need(&m.functionality, "functionality")?,
    );
    let mut notes = Vec::new();
    let files: Vec<PathBuf> = [proto.clone(), func.clone()]
        .into_iter()
        .chain(m.attackers.iter().cloned())
        .chain(m.simulators.iter().cloned())
        .collect();
    let loaded = load_all(&files, &mut notes)?;
    let named = |i: usize| loaded[i].named.clone();
    let na = m.attackers.len();
    let case = EmulationCase {
        protocol: named(0),
        functionality: named(1),
        attackers: (2..2 + na).map(named).collect(),
        simulators: (2 + na..loaded.len()).map(named).collect(),
        real_budget: m.real_budget.unwrap_or(Budget::Unbounded),
        ideal_budget: m.ideal_budget.unwrap_or(Budget::Unbounded),
    };
    let spec = EquivSpec {
        kind: kind.clone(),
        class: env_class(&m, limits.max_runs)?,
    };
    let report = verify_emulation(&case, &spec, &grid, limits.max_calls)?;
    let grid_text: Vec<String> = grid.iter().map(|n| n.to_string()).collect();
    let mut out = vec![report_header(
        "emulate",
        &m.name,
        &format!(
            "relation={kind} class={} grid={} real-budget={} ideal-budget={}",
            spec.class.describe(),
            grid_text.join(","),
            case.real_budget,
            case.ideal_budget
        ),
    )
    .trim_end()
    .to_string()];
    for s in &report.inadmissible_simulators {
        out.push(format!(
            "check=simulator:{s} status=fail detail=exceeds the ideal-world budget; excluded"
        ));
    }
    out.extend(report.lines());
    if let Some(dir) = out_dir {
        export_tables(dir, &grid)?;
        for (r, a) in report.results.iter().zip(&case.attackers) {
            let Some(v) = &r.verdict else { continue };
            write(
                &dir.join(format!("profile-{}.csv", r.attacker)),
                &v.profile.to_csv(),
            )?;
            if let Some(c) = &v.counterexample {
                let ai = 2 + case
                    .attackers
                    .iter()
                    .position(|x| x.name == a.name)
                    .expect("attacker");
                let si = r
                    .simulator
                    .as_ref()
                    .and_then(|s| case.simulators.iter().position(|x| &x.name == s))
                    .map(|i| 2 + na + i)
                    .expect("simulator of a verdict");
                let src = |i: usize| (loaded[i].named.name.clone(), loaded[i].src.clone());
                let file = CounterexampleFile::new(
                    &kind,
                    WorldSource {
                        context: src(ai),
                        program: src(0),
                        budget: case.real_budget,
                    },
                    WorldSource {
                        context: src(si),
                        program: src(1),
                        budget: case.ideal_budget,
                    },
                    c,
                );
                let name = format!("counterexample-{}.txt", r.attacker);
                write(&dir.join(&name), &file.to_text())?;
                out.push(format!("# counterexample written to {name}"));
            }
        }
        write(&dir.join("report.txt"), &(out.join("\n") + "\n"))?;
    }
    Ok((
        if report.holds {
            Exit::Pass
        } else {
            Exit::PropertyFails
        },
        out,
    ))
}

fn load_universe(m: &Manifest, limits: &Limits) -> Result<Universe, CliError> {
    let mut notes = Vec::new();
    let mut group = |files: &Vec<PathBuf>| -> Result<Vec<Named>, CliError> {
        Ok(load_all(files, &mut notes)?
            .into_iter()
            .map(|l| l.named)
            .collect())
    };
    let source_programs = group(&m.source_programs)?;
    let target_programs = if m.target_programs.is_empty() {
        source_programs.clone()
    } else {
        group(&m.target_programs)?
    };
    let source_contexts = group(&m.source_contexts)?;
    let target_contexts = if m.target_contexts.is_empty() {
        source_contexts.clone()
    } else {
        group(&m.target_contexts)?
    };
    let envs = match env_class(m, limits.max_runs)? {
        EnvClass::Explicit(e) => e,
        EnvClass::Bounded { .. } => {
            return Err(CliError::new(
                Exit::InvalidModel,
                "compiler checks need an explicit or alphabet environment class",
            ))
        }
    };
    Ok(Universe {
        source_programs,
        target_programs,
        source_contexts,
        target_contexts,
        envs,
        grid: m.grid.clone(),
        source_budget: m.source_budget.unwrap_or(Budget::Unbounded),
        target_budget: m.target_budget.unwrap_or(Budget::Unbounded),
    })
}

fn compiler_from(pairs: &[(String, String)], u: &Universe) -> Result<Compiler, CliError> {
    let mut map = Vec::new();
    for p in &u.source_programs {
        let target = pairs
            .iter()
            .find(|(a, _)| *a == p.name)
            .map(|(_, b)| b.as_str())
            .unwrap_or(&p.name);
        let t = u
            .target_programs
            .iter()
            .position(|q| q.name == target)
            .ok_or_else(|| {
                CliError::new(
                    Exit::InvalidModel,
                    format!("compiler targets unknown program `{target}`"),
                )
            })?;
        map.push(t);
    }
    let name = if pairs.is_empty() {
        "id".to_string()
    } else {
        "manifest".to_string()
    };
    Ok(Compiler { name, map })
}

fn universe_header(command: &str, m: &Manifest, u: &Universe, kinds: &[EquivKind]) -> String {
    let k: Vec<String> = kinds.iter().map(|k| k.to_string()).collect();
    let g: Vec<String> = u.grid.iter().map(|n| n.to_string()).collect();
    report_header(
        command,
        &m.name,
        &format!(
            "relations={} envs={} grid={} source-budget={} target-budget={}",
            k.join(";"),
            u.envs.len(),
            g.join(","),
            u.source_budget,
            u.target_budget
        ),
    )
    .trim_end()
    .to_string()
}

fn compiler_check(
    path: &Path,
    equiv: &Option<String>,
    map: &Option<String>,
    out_dir: &Option<PathBuf>,
    limits: &Limits,
) -> Result<(Exit, Vec<String>), CliError> {
    let m = read_manifest(path)?;
    let kind = equiv_arg(equiv, m.equiv.as_ref())?;
    let u = load_universe(&m, limits)?;
    let pairs: Vec<(String, String)> = match map {
        None => m.compiler.clone(),
        Some(s) => s
            .split(',')
            .map(|w| {
                w.split_once("->")
                    .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                    .ok_or_else(|| {
                        CliError::new(Exit::InvalidModel, format!("bad map entry `{w}`"))
                    })
            })
            .collect::<Result<_, _>>()?,
    };
    let cm = compiler_from(&pairs, &u)?;
    let mut out = vec![universe_header(
        "compiler-check",
        &m,
        &u,
        std::slice::from_ref(&kind),
    )];
    let ev = Evaluator::new(u, &limits.ceilings())?;
    let mapping: Vec<String> = cm
        .map
        .iter()
        .enumerate()
        .map(|(s, &t)| {
            format!(
                "{}->{}",
                ev.universe.source_programs[s].name, ev.universe.target_programs[t].name
            )
        })
        .collect();
    let rhc = check_pred_rhc(&ev, &cm, &kind)?;
    let rhp = check_pred_rhp(&ev, &cm, &kind)?;
    for (name, r) in [("rhc", &rhc), ("rhp", &rhp)] {
        let status = if r.is_none() { "pass" } else { "fail" };
        let detail = r
            .as_ref()
            .map(|f| f.to_string())
            .unwrap_or_else(|| "every admissible target context matched".into());
        out.push(format!(
            "check={name} status={status} detail=relation={kind} compiler={} {detail}",
            mapping.join(",")
        ));
    }
    if let Some(dir) = out_dir {
        write(&dir.join("report.txt"), &(out.join("\n") + "\n"))?;
    }
    Ok((
        if rhc.is_none() {
            Exit::Pass
        } else {
            Exit::PropertyFails
        },
        out,
    ))
}

fn theorems(
    path: &Path,
    equiv: &Option<String>,
    out_dir: &Option<PathBuf>,
    limits: &Limits,
) -> Result<(Exit, Vec<String>), CliError> {
    let m = read_manifest(path)?;
    let kinds = match equiv {
        Some(_) => vec![equiv_arg(equiv, None)?],
        None => ["perfect", "stat:1/4", "comp:c=1,N=0"]
            .iter()
            .map(|k| EquivKind::parse(k).expect("built-in relation"))
            .collect(),
    };
    let u = load_universe(&m, limits)?;
    let mut out = vec![universe_header("theorems", &m, &u, &kinds)];
    let ceilings = limits.ceilings();
    let cms = Compiler::all(u.source_programs.len(), u.target_programs.len(), &ceilings)?;
    let ev = Evaluator::new(u, &ceilings)?;
    let mut ok = true;
    for k in &kinds {
        let line = cross_check_theorems(&ev, &cms, k)?;
        ok &= line.rhc_rhp_disagreements == 0 && line.lemma_disagreements == 0;
        out.push(line.to_string());
    }
    if let Some(dir) = out_dir {
        write(&dir.join("report.txt"), &(out.join("\n") + "\n"))?;
    }
    Ok((if ok { Exit::Pass } else { Exit::PropertyFails }, out))
}

fn replay_cmd(file: &Path) -> Result<(Exit, Vec<String>), CliError> {
    let text = read(file)?;
    let cx = CounterexampleFile::parse(&text).map_err(|e| match e {
        ReplayError::Empty => CliError::new(Exit::Io, format!("{}: {e}", file.display())),
        _ => CliError::new(Exit::InvalidModel, format!("{}: {e}", file.display())),
    })?;
    let r = replay(&cx).map_err(|e| CliError::new(Exit::InvalidModel, e.to_string()))?;
    let status = if r.confirmed() { "pass" } else { "fail" };
    let line = format!(
        "check=replay status={status} detail=env={} n={} relation={} recorded=({},{},{}) recomputed=({},{},{}) matches={} violates={}",
        cx.env.name,
        cx.n,
        cx.relation,
        crate::prob::format(&cx.left_one),
        crate::prob::format(&cx.right_one),
        crate::prob::format(&cx.advantage),
        crate::prob::format(&r.left_one),
        crate::prob::format(&r.right_one),
        crate::prob::format(&crate::prob::abs(&(r.left_one.clone() - r.right_one.clone()))),
        r.matches,
        r.violates
    );
    Ok((
        if r.confirmed() {
            Exit::Pass
        } else {
            Exit::PropertyFails
        },
        vec![line],
    ))
}

/// Runs one parsed command; the lines go to standard output.
pub fn execute(cli: &Cli) -> Result<(Exit, Vec<String>), CliError> {
    match &cli.command {
        Command::Check { path } => check(path),
        Command::Behav {
            context,
            program,
            envs,
            grid,
            budget,
            out,
        } => behav_cmd(context, program, envs, grid, budget, out),
        Command::Emulate {
            manifest,
            grid,
            equiv,
            out,
            limits,
        } => emulate(manifest, grid, equiv, out, limits),
        Command::CompilerCheck {
            manifest,
            equiv,
            map,
            out,
            limits,
        } => compiler_check(manifest, equiv, map, out, limits),
        Command::Theorems {
            manifest,
            equiv,
            out,
            limits,
        } => theorems(manifest, equiv, out, limits),
        Command::Replay { file } => replay_cmd(file),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Exit::InvalidModel as i32
            } else {
                0
            };
        }
    };
    let run = || match execute(&cli) {
        Ok((exit, lines)) => {
            for l in lines {
                println!("{l}");
            }
            exit as i32
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.exit as i32
        }
    };
    match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: {e}");
                Exit::Io as i32
            }
        },
        None => run(),
    }
}
