//! Command-line front end: compile circuits to machine programs, verify and
//! score programs, generate benchmark corpora, and emit animation frames.
//!
//! Exit codes: 0 success, 1 verification found violations, 2 solver timeout,
//! 3 spatial bounds exhausted / routing deadlock, 4 i/o or schema errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dpqa_core::arch::ArchSpec;
use dpqa_core::backend::BackendKind;
use dpqa_core::circuit::{generate_graph_circuit, Circuit};
use dpqa_core::codegen::{lower, Program};
use dpqa_core::driver::{
    solve_hybrid, solve_optimal, DriverConfig, DriverError, HybridResult, OptimalResult,
};
use dpqa_core::encode::{build_model, BuildOpts};
use dpqa_core::fidelity::{estimate, LaserMode};
use dpqa_core::smtlib;
use dpqa_core::verifier::{animation_frames, verify};

#[derive(Parser)]
#[command(name = "dpqa", version, about = "layout synthesis for reconfigurable atom arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile circuits into machine programs.
    Compile(CompileArgs),
    /// Check a program against the hardware rules.
    Verify {
        program: PathBuf,
        circuit: PathBuf,
        arch: PathBuf,
    },
    /// Timing and infidelity estimates for a compiled program.
    Fidelity {
        program: PathBuf,
        circuit: PathBuf,
        arch: PathBuf,
        #[arg(long, default_value = "local")]
        laser: String,
    },
    /// Generate a deterministic corpus of regular-graph circuits.
    Bench {
        /// Comma-separated node counts.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<u32>,
        #[arg(long, default_value_t = 10)]
        count: u32,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "bench")]
        out_dir: PathBuf,
    },
    /// Emit animation frames (and optionally SVG) for a program.
    Animate {
        program: PathBuf,
        arch: PathBuf,
        #[arg(long, default_value_t = 8)]
        frames_per_move: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CompileArgs {
    /// Circuit documents (several files run as independent jobs).
    circuits: Vec<PathBuf>,
    /// Architecture document; defaults to the built-in machine.
    #[arg(long)]
    arch: Option<PathBuf>,
    /// optimal | hybrid | auto (auto picks optimal for small circuits).
    #[arg(long, default_value = "auto")]
    mode: String,
    /// native | pipe[:command] (pipe reads DPQA_SMT_SOLVER when bare).
    #[arg(long, default_value = "native")]
    backend: String,
    /// Write the final model as SMT-LIB2 to this path.
    #[arg(long)]
    dump_smt: Option<PathBuf>,
    #[arg(long, default_value_t = 600)]
    check_timeout: u64,
    #[arg(long, default_value_t = 120)]
    peel_timeout: u64,
    #[arg(long)]
    global_timeout: Option<u64>,
    #[arg(long, default_value_t = 0.05)]
    switch_frac: f64,
    /// Gate-count threshold for auto mode.
    #[arg(long, default_value_t = 40)]
    auto_gate_limit: u32,
    /// Parallel jobs for multiple circuit files.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output program path (single job only; default <stem>.program.json).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output stats path (single job only; default <stem>.stats.json).
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Serialize)]
struct ProbeStats {
    stages: usize,
    verdict: &'static str,
    ms: u128,
}

#[derive(Serialize)]
struct PeelStats {
    executed: usize,
    matching_bound: usize,
    extra_stages: usize,
    ms: u128,
}

#[derive(Serialize)]
struct CompileStats {
    circuit: String,
    mode: String,
    backend: String,
    qubits: u32,
    gates: u32,
    stages: usize,
    wall_ms: u128,
    verifier_clean: bool,
    lower_bound: Option<usize>,
    probes: Vec<ProbeStats>,
    peels: Vec<PeelStats>,
    recovery_stages: usize,
    switch_threshold: Option<usize>,
    pitch_um: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Compile(args) => cmd_compile(args),
        Command::Verify { program, circuit, arch } => cmd_verify(&program, &circuit, &arch),
        Command::Fidelity { program, circuit, arch, laser } => {
            cmd_fidelity(&program, &circuit, &arch, &laser)
        }
        Command::Bench { sizes, count, degree, seed, out_dir } => {
            cmd_bench(&sizes, count, degree, seed, &out_dir)
        }
        Command::Animate { program, arch, frames_per_move, out, svg_dir } => {
            cmd_animate(&program, &arch, frames_per_move, out.as_deref(), svg_dir.as_deref())
        }
    };
    ExitCode::from(code)
}

fn fail(msg: impl std::fmt::Display, code: u8) -> u8 {
    eprintln!("dpqa: {msg}");
    code
}

fn read_to_string(path: &Path) -> Result<String, u8> {
    std::fs::read_to_string(path).map_err(|e| fail(format_args!("{}: {e}", path.display()), 4))
}

fn load_arch(path: Option<&Path>) -> Result<ArchSpec, u8> {
    match path {
        None => Ok(ArchSpec::default()),
        Some(p) => ArchSpec::from_json(&read_to_string(p)?).map_err(|e| fail(e, 4)),
    }
}

fn driver_exit(e: &DriverError) -> u8 {
    match e {
        DriverError::Timeout { .. } => 2,
        DriverError::BoundsExhausted { .. } | DriverError::Deadlock => 3,
        _ => 4,
    }
}

enum Solved {
    Optimal(OptimalResult),
    Hybrid(HybridResult),
}

fn cmd_compile(args: CompileArgs) -> u8 {
    if args.circuits.is_empty() {
        return fail("compile needs at least one circuit file", 4);
    }
    if args.circuits.len() > 1 && (args.out.is_some() || args.stats.is_some()) {
        return fail("--out/--stats apply to single-circuit runs", 4);
    }
    let backend = match BackendKind::parse(&args.backend) {
        Ok(b) => b,
        Err(e) => return fail(e, 4),
    };
    let arch = match load_arch(args.arch.as_deref()) {
        Ok(a) => a,
        Err(c) => return c,
    };
    let cfg = DriverConfig {
        backend,
        check_timeout: Duration::from_secs(args.check_timeout),
        peel_timeout: Duration::from_secs(args.peel_timeout),
        global_timeout: args.global_timeout.map(Duration::from_secs),
        switch_frac: args.switch_frac,
    };

    let jobs = args.jobs.max(1);
    let results = std::sync::Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<&PathBuf>> = args
            .circuits
            .iter()
            .enumerate()
            .fold(vec![Vec::new(); jobs], |mut acc, (i, p)| {
                acc[i % jobs].push(p);
                acc
            });
        for chunk in chunks {
            let cfg = &cfg;
            let arch = &arch;
            let args = &args;
            let results = &results;
            scope.spawn(move || {
                for path in chunk {
                    let code = compile_one(path, arch, cfg, args);
                    results.lock().unwrap().push(code);
                }
            });
        }
    });
    results.into_inner().unwrap().into_iter().max().unwrap_or(0)
}

fn compile_one(path: &Path, arch: &ArchSpec, cfg: &DriverConfig, args: &CompileArgs) -> u8 {
    let started = Instant::now();
    let text = match read_to_string(path) {
        Ok(t) => t,
        Err(c) => return c,
    };
    let circuit = match Circuit::from_json(&text) {
        Ok(c) => c,
        Err(e) => return fail(format_args!("{}: {e}", path.display()), 4),
    };
    let mode = match args.mode.as_str() {
        "optimal" => "optimal",
        "hybrid" => "hybrid",
        "auto" => {
            if circuit.num_gates() <= args.auto_gate_limit {
                "optimal"
            } else {
                "hybrid"
            }
        }
        other => return fail(format_args!("unknown mode `{other}`"), 4),
    };
    let solved = if mode == "optimal" {
        solve_optimal(&circuit, arch, cfg).map(Solved::Optimal)
    } else {
        solve_hybrid(&circuit, arch, cfg).map(Solved::Hybrid)
    };
    let solved = match solved {
        Ok(s) => s,
        Err(e) => return fail(format_args!("{}: {e}", path.display()), driver_exit(&e)),
    };
    let assignment = match &solved {
        Solved::Optimal(o) => &o.assignment,
        Solved::Hybrid(h) => &h.assignment,
    };
    let program = match lower(assignment, &circuit, arch) {
        Ok(p) => p,
        Err(e) => return fail(format_args!("{}: {e}", path.display()), 4),
    };
    let violations = match verify(&program, &circuit, arch) {
        Ok(v) => v,
        Err(e) => return fail(format_args!("{}: {e}", path.display()), 4),
    };
    let clean = violations.is_empty();
    if !clean {
        for v in &violations {
            eprintln!("dpqa: {}: {}", path.display(), serde_json::to_string(v).unwrap());
        }
    }

    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let parent = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let out = args.out.clone().unwrap_or_else(|| parent.join(format!("{stem}.program.json")));
    let stats_path =
        args.stats.clone().unwrap_or_else(|| parent.join(format!("{stem}.stats.json")));

    let stats = CompileStats {
        circuit: path.display().to_string(),
        mode: mode.into(),
        backend: args.backend.clone(),
        qubits: circuit.num_qubits(),
        gates: circuit.num_gates(),
        stages: assignment.stages,
        wall_ms: started.elapsed().as_millis(),
        verifier_clean: clean,
        lower_bound: match &solved {
            Solved::Optimal(o) => Some(o.lower_bound),
            Solved::Hybrid(_) => None,
        },
        probes: match &solved {
            Solved::Optimal(o) => o.probes.clone(),
            Solved::Hybrid(h) => h.residual_probes.clone(),
        }
        .iter()
        .map(|p| ProbeStats { stages: p.stages, verdict: p.verdict, ms: p.wall.as_millis() })
        .collect(),
        peels: match &solved {
            Solved::Optimal(_) => Vec::new(),
            Solved::Hybrid(h) => h
                .peels
                .iter()
                .map(|p| PeelStats {
                    executed: p.executed.len(),
                    matching_bound: p.matching_bound,
                    extra_stages: p.extra_stages,
                    ms: p.wall.as_millis(),
                })
                .collect(),
        },
        recovery_stages: match &solved {
            Solved::Optimal(_) => 0,
            Solved::Hybrid(h) => h.recoveries.len(),
        },
        switch_threshold: match &solved {
            Solved::Optimal(_) => None,
            Solved::Hybrid(h) => Some(h.switch_threshold),
        },
        pitch_um: arch.site_pitch_um,
    };

    if let Some(smt_path) = &args.dump_smt {
        let opts = BuildOpts::standard(arch);
        match build_model(&circuit, arch, assignment.stages, &opts) {
            Ok(m) => {
                if let Err(e) = std::fs::write(smt_path, smtlib::dump(&m)) {
                    return fail(format_args!("{}: {e}", smt_path.display()), 4);
                }
            }
            Err(e) => return fail(e, 4),
        }
    }
    if !clean {
        return 1;
    }
    if let Err(e) = std::fs::write(&out, program.to_json()) {
        return fail(format_args!("{}: {e}", out.display()), 4);
    }
    if let Err(e) = std::fs::write(&stats_path, serde_json::to_string_pretty(&stats).unwrap()) {
        return fail(format_args!("{}: {e}", stats_path.display()), 4);
    }
    println!(
        "{}: {} stages, {} gates, {} ({} ms) -> {}",
        path.display(),
        assignment.stages,
        circuit.num_gates(),
        mode,
        started.elapsed().as_millis(),
        out.display()
    );
    0
}

fn cmd_verify(program: &Path, circuit: &Path, arch: &Path) -> u8 {
    let (p, c, a) = match load_triple(program, circuit, arch) {
        Ok(t) => t,
        Err(code) => return code,
    };
    match verify(&p, &c, &a) {
        Err(e) => fail(format_args!("malformed program: {e}"), 4),
        Ok(violations) if violations.is_empty() => {
            println!("{{\"pass\":true}}");
            0
        }
        Ok(violations) => {
            for v in &violations {
                println!("{}", serde_json::to_string(v).unwrap());
            }
            1
        }
    }
}

fn cmd_fidelity(program: &Path, circuit: &Path, arch: &Path, laser: &str) -> u8 {
    let mode = match LaserMode::parse(laser) {
        Ok(m) => m,
        Err(e) => return fail(e, 4),
    };
    let (p, c, a) = match load_triple(program, circuit, arch) {
        Ok(t) => t,
        Err(code) => return code,
    };
    match estimate(&p, &c, &a, mode) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            0
        }
        Err(e) => fail(e, 4),
    }
}

fn load_triple(
    program: &Path,
    circuit: &Path,
    arch: &Path,
) -> Result<(Program, Circuit, ArchSpec), u8> {
    let p = Program::from_json(&read_to_string(program)?)
        .map_err(|e| fail(format_args!("{}: {e}", program.display()), 4))?;
    let c = Circuit::from_json(&read_to_string(circuit)?)
        .map_err(|e| fail(format_args!("{}: {e}", circuit.display()), 4))?;
    let a = ArchSpec::from_json(&read_to_string(arch)?)
        .map_err(|e| fail(format_args!("{}: {e}", arch.display()), 4))?;
    Ok((p, c, a))
}

fn cmd_bench(sizes: &[u32], count: u32, degree: u32, seed: u64, out_dir: &Path) -> u8 {
    if sizes.is_empty() {
        return fail("bench needs --sizes", 4);
    }
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return fail(format_args!("{}: {e}", out_dir.display()), 4);
    }
    for &n in sizes {
        for idx in 0..count {
            // Deterministic per-file stream: corpus regeneration is
            // byte-identical for a fixed base seed.
            let file_seed = seed ^ ((n as u64) << 32) ^ idx as u64;
            let c = match generate_graph_circuit(n, degree, file_seed) {
                Ok(c) => c,
                Err(e) => return fail(format_args!("size {n}: {e}"), 4),
            };
            let path = out_dir.join(format!("{n}_{idx}.json"));
            if let Err(e) = std::fs::write(&path, c.to_json()) {
                return fail(format_args!("{}: {e}", path.display()), 4);
            }
        }
    }
    println!("wrote {} circuits to {}", sizes.len() as u32 * count, out_dir.display());
    0
}

fn cmd_animate(
    program: &Path,
    arch: &Path,
    frames_per_move: usize,
    out: Option<&Path>,
    svg_dir: Option<&Path>,
) -> u8 {
    let p = match read_to_string(program).and_then(|t| {
        Program::from_json(&t).map_err(|e| fail(format_args!("{}: {e}", program.display()), 4))
    }) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let a = match load_arch(Some(arch)) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let frames = match animation_frames(&p, &a, frames_per_move) {
        Ok(f) => f,
        Err(e) => return fail(format_args!("{}: {e}", program.display()), 4),
    };
    let json = serde_json::to_string_pretty(&frames).unwrap();
    match out {
        None => println!("{json}"),
        Some(path) => {
            if let Err(e) = std::fs::write(path, json) {
                return fail(format_args!("{}: {e}", path.display()), 4);
            }
        }
    }
    if let Some(dir) = svg_dir {
        if let Err(e) = std::fs::create_dir_all(dir) {
            return fail(format_args!("{}: {e}", dir.display()), 4);
        }
        let extent = a.x.max(a.y) as f64 * a.site_pitch_um + 2.0 * a.site_pitch_um;
        for (i, f) in frames.iter().enumerate() {
            let mut svg = format!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n",
                -a.site_pitch_um, -a.site_pitch_um, extent, extent
            );
            for (q, pos) in f.positions.iter().enumerate() {
                svg.push_str(&format!(
                    "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#1f6feb\"/>\n  \
                     <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"5\">q{}</text>\n",
                    pos[0], pos[1], pos[0] + 3.0, pos[1], q
                ));
            }
            svg.push_str("</svg>\n");
            let path = dir.join(format!("frame_{i:04}.svg"));
            if let Err(e) = std::fs::write(&path, svg) {
                return fail(format_args!("{}: {e}", path.display()), 4);
            }
        }
    }
    0
}
