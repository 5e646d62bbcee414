//! Command-line front door: compile to C, normalize and dump phases, check
//! properties, evaluate on concrete inputs.

use std::process::ExitCode;

use qfc::ast::ObjType;
use qfc::diag::{codes, Diagnostic};
use qfc::normalize::{phase1, phase2, phase3, Strategy};
use qfc::pipeline::{compile, front, Options};
use qfc::pretty::pretty_term;
use qfc::verify::{self, Value};

const USAGE: &str = "\
usage:
  qfc compile <file.qf> [-o <out.c>] [options]     translate to C
  qfc normalize <file.qf> [--dump-phase 0|1|2|3] [options]
  qfc check <file.qf> --property <subformula|sharpened|first-order|preservation> [options]
  qfc eval <file.qf> <arg>... [options]            run the reference interpreter

options:
  --entry <name>      entry definition (default: main)
  --routine <name>    generated C routine name (default: prog)
  --strategy <s>      need | value (default: need)
  --fuel <n>          step budget override (also via QFC_FUEL)
  --samples <n>       oracle sample count (default: 100)
  --seed <n>          oracle seed (default: 0xFE1D5)

exit codes: 0 success, 1 user error, 2 internal error
";

struct Cli {
    command: String,
    input: String,
    output: Option<String>,
    options: Options,
    dump_phase: Option<u8>,
    property: Option<String>,
    samples: usize,
    seed: u64,
    eval_args: Vec<String>,
}

fn usage_err(msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(codes::USAGE, msg.into())
}

fn parse_cli(argv: &[String]) -> Result<Cli, Diagnostic> {
    if argv.is_empty() {
        return Err(usage_err("missing command"));
    }
    let command = argv[0].clone();
    if !["compile", "normalize", "check", "eval"].contains(&command.as_str()) {
        return Err(usage_err(format!("unknown command `{command}`")));
    }
    let mut options = Options::default();
    if let Ok(v) = std::env::var("QFC_FUEL") {
        let fuel: u64 = v
            .parse()
            .map_err(|_| usage_err("QFC_FUEL must be an integer"))?;
        options.meta_fuel = fuel;
        options.norm_fuel = fuel;
        options.interp_fuel = fuel;
    }
    let mut cli = Cli {
        command,
        input: String::new(),
        output: None,
        options,
        dump_phase: None,
        property: None,
        samples: 100,
        seed: verify::ORACLE_SEED,
        eval_args: Vec::new(),
    };
    let mut i = 1;
    let mut positional: Vec<String> = Vec::new();
    while i < argv.len() {
        let arg = &argv[i];
        let mut take = |name: &str| -> Result<String, Diagnostic> {
            i += 1;
            argv.get(i)
                .cloned()
                .ok_or_else(|| usage_err(format!("{name} needs a value")))
        };
        match arg.as_str() {
            "-o" | "--output" => cli.output = Some(take("-o")?),
            "--entry" => cli.options.entry = take("--entry")?,
            "--routine" => cli.options.routine = take("--routine")?,
            "--strategy" => {
                cli.options.strategy = match take("--strategy")?.as_str() {
                    "need" => Strategy::Need,
                    "value" => Strategy::Value,
                    other => return Err(usage_err(format!("unknown strategy `{other}`"))),
                }
            }
            "--fuel" => {
                let fuel: u64 = take("--fuel")?
                    .parse()
                    .map_err(|_| usage_err("--fuel must be an integer"))?;
                cli.options.meta_fuel = fuel;
                cli.options.norm_fuel = fuel;
                cli.options.interp_fuel = fuel;
            }
            "--dump-phase" => {
                let n: u8 = take("--dump-phase")?
                    .parse()
                    .map_err(|_| usage_err("--dump-phase must be 0..3"))?;
                if n > 3 {
                    return Err(usage_err("--dump-phase must be 0..3"));
                }
                cli.dump_phase = Some(n);
            }
            "--property" => cli.property = Some(take("--property")?),
            "--samples" => {
                cli.samples = take("--samples")?
                    .parse()
                    .map_err(|_| usage_err("--samples must be an integer"))?
            }
            "--seed" => {
                cli.seed = take("--seed")?
                    .parse()
                    .map_err(|_| usage_err("--seed must be an integer"))?
            }
            flag if flag.starts_with('-') => {
                return Err(usage_err(format!("unknown flag `{flag}`")))
            }
            _ => positional.push(arg.clone()),
        }
        i += 1;
    }
    if positional.is_empty() {
        return Err(usage_err("missing input file"));
    }
    cli.input = positional.remove(0);
    cli.eval_args = positional;
    Ok(cli)
}

fn read_input(path: &str) -> Result<String, Diagnostic> {
    std::fs::read_to_string(path)
        .map_err(|e| Diagnostic::new(codes::USAGE, format!("cannot read `{path}`: {e}")))
}

/// Parses one command-line literal against an expected type.
fn parse_value(text: &str, ty: &ObjType) -> Result<Value, Diagnostic> {
    let bad = |msg: String| Diagnostic::new(codes::USAGE, msg);
    let text = text.trim();
    match ty {
        ObjType::Base(qfc::ast::Base::Int) => text
            .parse::<i32>()
            .map(Value::Int)
            .map_err(|_| bad(format!("`{text}` is not an Int"))),
        ObjType::Base(qfc::ast::Base::Float) => text
            .parse::<f64>()
            .map(Value::Float)
            .map_err(|_| bad(format!("`{text}` is not a Float"))),
        ObjType::Base(qfc::ast::Base::Bool) => match text {
            "true" | "True" => Ok(Value::Bool(true)),
            "false" | "False" => Ok(Value::Bool(false)),
            _ => Err(bad(format!("`{text}` is not a Bool"))),
        },
        ObjType::Base(qfc::ast::Base::Unit) => {
            if text == "()" {
                Ok(Value::Unit)
            } else {
                Err(bad(format!("`{text}` is not ()")))
            }
        }
        ObjType::Array(elem) => {
            let inner = text
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| bad(format!("`{text}` is not an array literal like [1,2,3]")))?;
            let mut vals = Vec::new();
            if !inner.trim().is_empty() {
                for part in split_top(inner) {
                    vals.push(parse_value(&part, elem)?);
                }
            }
            Ok(Value::Arr(std::rc::Rc::new(vals)))
        }
        ObjType::Prod(a, b) => {
            let inner = text
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| bad(format!("`{text}` is not a pair literal like (1, 2.0)")))?;
            let parts = split_top(inner);
            if parts.len() != 2 {
                return Err(bad(format!("`{text}` is not a pair")));
            }
            Ok(Value::Pair(
                std::rc::Rc::new(parse_value(&parts[0], a)?),
                std::rc::Rc::new(parse_value(&parts[1], b)?),
            ))
        }
        other => Err(bad(format!(
            "cannot pass a value of type {} on the command line",
            qfc::pretty::pretty_type(other)
        ))),
    }
}

// Splits on top-level commas (outside brackets/parens).
fn split_top(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '[' | '(' => {
                depth += 1;
                cur.push(c);
            }
            ']' | ')' => {
                depth -= 1;
                cur.push(c);
            }
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur = String::new();
            }
            _ => cur.push(c),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn show_value(v: &Value) -> String {
    match v {
        Value::Int(n) => n.to_string(),
        Value::Float(x) => format!("{x:?}"),
        Value::Bool(b) => b.to_string(),
        Value::Unit => "()".to_string(),
        Value::Pair(a, b) => format!("({}, {})", show_value(a), show_value(b)),
        Value::Sum { right, payload } => {
            format!("{} {}", if *right { "Inr" } else { "Inl" }, show_value(payload))
        }
        Value::Arr(xs) => {
            let parts: Vec<String> = xs.iter().map(show_value).collect();
            format!("[{}]", parts.join(", "))
        }
        Value::Fun(_) => "<function>".to_string(),
    }
}

fn run(cli: Cli) -> Result<i32, Diagnostic> {
    let source = read_input(&cli.input)?;
    match cli.command.as_str() {
        "compile" => {
            let out_path = cli.output.clone().unwrap_or_else(|| {
                let stem = cli.input.strip_suffix(".qf").unwrap_or(&cli.input);
                format!("{stem}.c")
            });
            let result = compile(&source, cli.options)?;
            let header_path = std::path::Path::new(&out_path)
                .parent()
                .map(|d| d.join("qf_runtime.h"))
                .unwrap_or_else(|| "qf_runtime.h".into());
            std::fs::write(&out_path, &result.c_source).map_err(|e| {
                Diagnostic::new(codes::USAGE, format!("cannot write `{out_path}`: {e}"))
            })?;
            std::fs::write(&header_path, qfc::backend::RUNTIME_HEADER).map_err(|e| {
                Diagnostic::new(
                    codes::USAGE,
                    format!("cannot write `{}`: {e}", header_path.display()),
                )
            })?;
            eprintln!(
                "wrote {out_path} ({} normalization steps, result size {})",
                result.stats.total_steps(),
                result.stats.result_size
            );
            Ok(0)
        }
        "normalize" => {
            let mut p = front(&source, cli.options)?;
            let phase = cli.dump_phase.unwrap_or(3);
            if phase == 0 {
                println!("{}", pretty_term(&p.typed.term));
                return Ok(0);
            }
            if phase == 3 && p.options.strategy == Strategy::Value {
                return Err(usage_err(
                    "phase 3 is not run under --strategy value; use --dump-phase 2",
                ));
            }
            let mut fuel = p.options.norm_fuel;
            let (t1, _) = phase1(&p.typed.term, &p.typed.env, &mut p.supply, &mut fuel)?;
            if phase == 1 {
                println!("{}", pretty_term(&t1));
                return Ok(0);
            }
            let (t2, _) = phase2(&t1, &p.typed.env, &mut p.supply, &mut fuel)?;
            if phase == 2 {
                println!("{}", pretty_term(&t2));
                return Ok(0);
            }
            // Phases 2 and 3 interleave to a joint fixpoint.
            let mut current = t2;
            loop {
                let (t3, s3) = phase3(&current, &mut fuel)?;
                current = t3;
                if s3 == 0 {
                    break;
                }
                let (t2b, _) = phase2(&current, &p.typed.env, &mut p.supply, &mut fuel)?;
                current = t2b;
            }
            println!("{}", pretty_term(&current));
            Ok(0)
        }
        "check" => {
            let property = cli
                .property
                .ok_or_else(|| usage_err("check needs --property"))?;
            let mut p = front(&source, cli.options)?;
            let report = match property.as_str() {
                "subformula" => {
                    let (nf, _) = p.normalize()?;
                    verify::check_subformula(&nf)
                }
                "sharpened" => {
                    let (nf, _) = p.normalize()?;
                    verify::check_sharpened(&nf)
                }
                "first-order" => {
                    let (nf, _) = p.normalize()?;
                    verify::check_first_order(&nf)
                }
                "preservation" => {
                    let before = p.typed.term.clone();
                    let top = p.typed.top.clone();
                    let (nf, _) = p.normalize()?;
                    verify::oracle_compare(
                        &before,
                        &nf.term,
                        &top,
                        cli.samples,
                        cli.seed,
                        p.options.interp_fuel,
                    )
                }
                other => return Err(usage_err(format!("unknown property `{other}`"))),
            };
            if report.ok() {
                println!("ok: {property}");
                Ok(0)
            } else {
                println!("failed: {property}");
                for w in &report.witnesses {
                    println!("  {w}");
                }
                Ok(1)
            }
        }
        "eval" => {
            let mut p = front(&source, cli.options)?;
            let (args_tys, _) = p.typed.top.uncurry();
            if cli.eval_args.len() != args_tys.len() {
                return Err(usage_err(format!(
                    "entry takes {} argument(s), got {}",
                    args_tys.len(),
                    cli.eval_args.len()
                )));
            }
            let mut vals = Vec::new();
            for (text, ty) in cli.eval_args.iter().zip(&args_tys) {
                vals.push(parse_value(text, ty)?);
            }
            let (nf, _) = p.normalize()?;
            let result = verify::interp(&nf.term, &vals, p.options.interp_fuel)?;
            println!("{}", show_value(&result));
            Ok(0)
        }
        _ => unreachable!(),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    if argv.iter().any(|a| a == "--help" || a == "-h") || argv.is_empty() {
        print!("{USAGE}");
        return ExitCode::from(if argv.is_empty() { 1 } else { 0 });
    }
    let cli = match parse_cli(&argv) {
        Ok(cli) => cli,
        Err(d) => {
            eprintln!("{d}");
            eprint!("{USAGE}");
            return ExitCode::from(1);
        }
    };
    let input = cli.input.clone();
    // Deep terms during normalization want a roomy stack.
    let worker = std::thread::Builder::new()
        .name("qfc-pipeline".to_string())
        .stack_size(512 * 1024 * 1024)
        .spawn(move || run(cli))
        .expect("spawn pipeline thread");
    match worker.join() {
        Ok(Ok(code)) => ExitCode::from(code as u8),
        Ok(Err(diag)) => {
            eprintln!("{}", diag.render(&input));
            ExitCode::from(1)
        }
        Err(_) => {
            eprintln!("{input}: internal error: the pipeline panicked");
            ExitCode::from(2)
        }
    }
}
