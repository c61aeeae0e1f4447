//! Command-line front end. Every subcommand wraps one library capability;
//! see the crate examples for the same workflows as library calls.
//!
//! Exit codes: 0 success, 1 domain failure (undecided symbols, failed
//! verification, malformed input expression), 2 usage/configuration/IO.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use crate::context::{
    extract_identifiers, find_candidates, fuse, segment_document, ContextParams, NounLexicon,
    Segment,
};
use crate::harness::{
    self, evaluate_definiens, evaluate_senses, load_gold, predict_case, CorpusReport,
};
use crate::lexicon::{Dialect, Lexicon};
use crate::mst::{self, MathTree, NodeKind};
use crate::numeric::{
    check_equivalence, probe_branch_cuts, probe_csv, Binding, EvalTarget, NumericError,
    SampleRegion, Sampler,
};
use crate::tagger::{tag, RuleWeights, TaggedTree};
use crate::translator::translate;

const EXIT_OK: u8 = 0;
const EXIT_DOMAIN: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "mathsem", version, about = "Semantic LaTeX-to-CAS toolkit")]
struct Cli {
    /// Configuration file (default: ./mathsem.json, or $MATHSEM_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Write the primary output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a LaTeX math expression and print its tree.
    Parse {
        expression: String,
    },
    /// Translate an expression to a CAS dialect.
    Translate {
        expression: String,
        #[arg(long = "to", value_parser = parse_dialect)]
        dialect: Dialect,
    },
    /// Run the two-scan pipeline over a text document with embedded math.
    Analyze {
        /// Document text; use --file to read from disk instead.
        text: Option<String>,
        #[arg(long, conflicts_with = "text")]
        file: Option<PathBuf>,
    },
    /// Translate, then check the translation numerically against the
    /// semantic tree at seeded random complex points.
    Verify {
        expression: String,
        #[arg(long = "to", value_parser = parse_dialect)]
        dialect: Dialect,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, value_parser = parse_region)]
        region: Option<SampleRegion>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Walk a circle |var| = radius looking for branch-cut jumps.
    Probe {
        expression: String,
        #[arg(long)]
        var: String,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Score the pipeline against a gold corpus (bundled by default).
    EvalGold {
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long)]
        cutoff: Option<f64>,
    },
}

#[derive(Args)]
struct SamplingArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
}

fn parse_dialect(s: &str) -> Result<Dialect, String> {
    match s {
        "maple" => Ok(Dialect::Maple),
        "mathematica" => Ok(Dialect::Mathematica),
        other => Err(format!("unknown dialect `{other}` (maple|mathematica)")),
    }
}

fn parse_region(s: &str) -> Result<SampleRegion, String> {
    match s {
        "disk" => Ok(SampleRegion::Disk),
        "right-half-disk" => Ok(SampleRegion::RightHalfDisk),
        other => Err(format!("unknown region `{other}` (disk|right-half-disk)")),
    }
}

/// On-disk configuration; every field optional, flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    lexicon: Option<PathBuf>,
    nouns: Option<PathBuf>,
    weights: Option<WeightsConfig>,
    context: Option<ContextConfig>,
    sampler: Option<SamplerConfig>,
    tolerance: Option<f64>,
    cutoff: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsConfig {
    w_sig: Option<f64>,
    w_fn: Option<f64>,
    w_const: Option<f64>,
    tau: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextConfig {
    lambda_w: Option<f64>,
    lambda_f: Option<f64>,
    window: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplerConfig {
    seed: Option<u64>,
    count: Option<usize>,
    radius: Option<f64>,
}

struct Settings {
    lexicon: Lexicon,
    nouns: NounLexicon,
    weights: RuleWeights,
    context: ContextParams,
    sampler: Sampler,
    tolerance: f64,
    cutoff: f64,
}

#[derive(Debug)]
enum CliError {
    /// Bad usage, configuration, or IO; exit 2.
    Usage(String),
    /// The analysis itself failed; exit 1.
    Domain(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => m,
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn load_settings(flag: Option<&PathBuf>) -> Result<Settings, CliError> {
    let path = flag.cloned().or_else(|| {
        std::env::var_os("MATHSEM_CONFIG")
            .map(PathBuf::from)
            .or_else(|| {
                let local = PathBuf::from("mathsem.json");
                local.exists().then_some(local)
            })
    });
    let config = match path {
        Some(p) => {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<Config>(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
        }
        None => Config::default(),
    };

    let lexicon = match &config.lexicon {
        Some(p) => Lexicon::load(p).map_err(io_err)?,
        None => Lexicon::bundled(),
    };
    let nouns = match &config.nouns {
        Some(p) => NounLexicon::load(p).map_err(io_err)?,
        None => NounLexicon::bundled(),
    };
    let mut weights = RuleWeights::default();
    if let Some(w) = &config.weights {
        weights.w_sig = w.w_sig.unwrap_or(weights.w_sig);
        weights.w_fn = w.w_fn.unwrap_or(weights.w_fn);
        weights.w_const = w.w_const.unwrap_or(weights.w_const);
        weights.tau = w.tau.unwrap_or(weights.tau);
    }
    let mut context = ContextParams::default();
    if let Some(c) = &config.context {
        context.lambda_w = c.lambda_w.unwrap_or(context.lambda_w);
        context.lambda_f = c.lambda_f.unwrap_or(context.lambda_f);
        context.window = c.window.unwrap_or(context.window);
    }
    let mut sampler = Sampler::default();
    if let Some(s) = &config.sampler {
        sampler.seed = s.seed.unwrap_or(sampler.seed);
        sampler.count = s.count.unwrap_or(sampler.count);
        sampler.radius = s.radius.unwrap_or(sampler.radius);
    }
    Ok(Settings {
        lexicon,
        nouns,
        weights,
        context,
        sampler,
        tolerance: config.tolerance.unwrap_or(1e-10),
        cutoff: config.cutoff.unwrap_or(0.3),
    })
}

/// Entry point used by the binary; takes the full argv.
pub fn run(args: &[String]) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let settings = match load_settings(cli.config.as_ref()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return e.code();
        }
    };
    let result = dispatch(&cli, &settings);
    match result {
        Ok(output) => match write_output(cli.out.as_ref(), &output) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: {}", e.message());
                e.code()
            }
        },
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn dispatch(cli: &Cli, settings: &Settings) -> Result<String, CliError> {
    match &cli.command {
        Command::Parse { expression } => cmd_parse(expression, settings, cli.json),
        Command::Translate {
            expression,
            dialect,
        } => cmd_translate(expression, *dialect, settings, cli.json),
        Command::Analyze { text, file } => {
            let document = match (text, file) {
                (Some(t), _) => t.clone(),
                (None, Some(p)) => std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
                (None, None) => {
                    return Err(CliError::Usage(
                        "analyze needs a document: pass text or --file".into(),
                    ))
                }
            };
            cmd_analyze(&document, settings, cli.json)
        }
        Command::Verify {
            expression,
            dialect,
            sampling,
            region,
            tol,
        } => {
            let mut sampler = settings.sampler;
            sampler.seed = sampling.seed.unwrap_or(sampler.seed);
            sampler.count = sampling.samples.unwrap_or(sampler.count);
            sampler.radius = sampling.radius.unwrap_or(sampler.radius);
            cmd_verify(
                expression,
                *dialect,
                &sampler,
                region.unwrap_or_default(),
                tol.unwrap_or(settings.tolerance),
                settings,
                cli.json,
            )
        }
        Command::Probe {
            expression,
            var,
            radius,
            samples,
        } => cmd_probe(
            expression,
            var,
            radius.unwrap_or(settings.sampler.radius),
            samples.unwrap_or(1024),
            settings,
            cli.json,
        ),
        Command::EvalGold { gold, cutoff } => cmd_eval_gold(
            gold.as_ref(),
            cutoff.unwrap_or(settings.cutoff),
            settings,
            cli.json,
        ),
    }
}

fn parse_expression(expression: &str, settings: &Settings) -> Result<MathTree, CliError> {
    let tokens = mst::tokenize(expression).map_err(|e| CliError::Domain(e.to_string()))?;
    mst::parse_with_arities(&tokens, Some(&settings.lexicon.macro_arities()))
        .map_err(|e| CliError::Domain(e.to_string()))
}

fn tag_expression(expression: &str, settings: &Settings) -> Result<TaggedTree, CliError> {
    let tree = parse_expression(expression, settings)?;
    tag(&tree, &settings.lexicon, &settings.weights).map_err(|e| CliError::Domain(e.to_string()))
}

fn cmd_parse(expression: &str, settings: &Settings, as_json: bool) -> Result<String, CliError> {
    let tree = parse_expression(expression, settings)?;
    if as_json {
        let value = json!({
            "source": expression,
            "rendered": mst::render(&tree),
            "tree": tree_json(&tree),
        });
        return Ok(pretty(&value));
    }
    let mut out = format!("rendered: {}\n", mst::render(&tree));
    for (path, node) in tree.walk() {
        let indent = "  ".repeat(path.len());
        out.push_str(&format!("{indent}{}\n", node_label(node)));
    }
    Ok(out)
}

fn node_label(node: &MathTree) -> String {
    match &node.kind {
        NodeKind::Identifier(s) => format!("identifier {s}"),
        NodeKind::Number(s) => format!("number {s}"),
        NodeKind::Operator(c) => format!("operator {c}"),
        NodeKind::BinaryOp { op, .. } => format!("binary-op {op}"),
        NodeKind::Apply { .. } => "apply".into(),
        NodeKind::Scripted { sub, sup, .. } => format!(
            "scripted{}{}",
            if sub.is_some() { " sub" } else { "" },
            if sup.is_some() { " sup" } else { "" }
        ),
        NodeKind::Fenced { open, close, .. } => format!("fenced {open}{close}"),
        NodeKind::Sequence(items) => format!("sequence ({} items)", items.len()),
        NodeKind::Frac { .. } => "frac".into(),
        NodeKind::Sqrt { degree, .. } => {
            if degree.is_some() {
                "root".into()
            } else {
                "sqrt".into()
            }
        }
        NodeKind::SemanticMacro { name, params, args } => {
            format!("macro \\{name} ({} params, {} args)", params.len(), args.len())
        }
    }
}

fn tree_json(node: &MathTree) -> serde_json::Value {
    let children: Vec<_> = node.children().iter().map(|c| tree_json(c)).collect();
    let mut value = match &node.kind {
        NodeKind::Identifier(s) => json!({"kind": "identifier", "symbol": s}),
        NodeKind::Number(s) => json!({"kind": "number", "value": s}),
        NodeKind::Operator(c) => json!({"kind": "operator", "op": c.to_string()}),
        NodeKind::BinaryOp { op, .. } => json!({"kind": "binary-op", "op": op.to_string()}),
        NodeKind::Apply { .. } => json!({"kind": "apply"}),
        NodeKind::Scripted { .. } => json!({"kind": "scripted"}),
        NodeKind::Fenced { open, close, .. } => {
            json!({"kind": "fenced", "open": open.to_string(), "close": close.to_string()})
        }
        NodeKind::Sequence(_) => json!({"kind": "sequence"}),
        NodeKind::Frac { .. } => json!({"kind": "frac"}),
        NodeKind::Sqrt { .. } => json!({"kind": "sqrt"}),
        NodeKind::SemanticMacro { name, .. } => json!({"kind": "macro", "name": name}),
    };
    if !children.is_empty() {
        value["children"] = json!(children);
    }
    value
}

fn cmd_translate(
    expression: &str,
    dialect: Dialect,
    settings: &Settings,
    as_json: bool,
) -> Result<String, CliError> {
    let tagged = tag_expression(expression, settings)?;
    let report = translate(&tagged, &settings.lexicon, dialect)
        .map_err(|e| CliError::Domain(e.to_string()))?;
    if as_json {
        let value = json!({
            "dialect": dialect.name(),
            "output": report.output.rendered,
            "warnings": report.warnings,
            "senses": report.sense_trace.values().collect::<Vec<_>>(),
            "variables": report.var_map,
        });
        return Ok(pretty(&value));
    }
    let mut out = format!("{}\n", report.output.rendered);
    for w in &report.warnings {
        out.push_str(&format!("warning: {w:?}\n"));
    }
    Ok(out)
}

fn cmd_analyze(document: &str, settings: &Settings, as_json: bool) -> Result<String, CliError> {
    let doc = segment_document(document).map_err(|e| CliError::Domain(e.to_string()))?;
    let mut candidates = BTreeMap::new();
    for (_, tree) in doc.math_trees() {
        for identifier in extract_identifiers(tree) {
            if let std::collections::btree_map::Entry::Vacant(slot) =
                candidates.entry(identifier)
            {
                let found =
                    find_candidates(&doc, slot.key(), &settings.context, &settings.nouns)
                        .map_err(|e| CliError::Domain(e.to_string()))?;
                slot.insert(found);
            }
        }
    }
    // per-segment failures are reported in place; processing continues
    let mut segments: Vec<(usize, String, Result<TaggedTree, String>)> = Vec::new();
    let mut math_index = 0;
    for segment in &doc.segments {
        let Segment::Math { source, tree, error } = segment else {
            continue;
        };
        let outcome = match (tree, error) {
            (Some(tree), _) => tag(tree, &settings.lexicon, &settings.weights)
                .map(|scan1| fuse(&scan1, &candidates, &settings.lexicon, &settings.weights))
                .map_err(|e| e.to_string()),
            (None, error) => Err(error.clone().unwrap_or_else(|| "unparsable".into())),
        };
        segments.push((math_index, source.clone(), outcome));
        math_index += 1;
    }

    if as_json {
        let value = json!({
            "sentences": doc.sentence_count(),
            "math_segments": segments.len(),
            "definiens": candidates,
            "senses": segments.iter().map(|(index, source, outcome)| match outcome {
                Ok(fused) => json!({
                    "segment": index,
                    "source": source,
                    "tags": fused.tags.iter().map(|(path, t)| json!({
                        "path": path,
                        "symbol": t.symbol,
                        "decided": t.decided,
                        "provenance": t.provenance,
                        "top": t.top(),
                    })).collect::<Vec<_>>(),
                }),
                Err(error) => json!({
                    "segment": index,
                    "source": source,
                    "error": error,
                }),
            }).collect::<Vec<_>>(),
        });
        return Ok(pretty(&value));
    }

    let mut out = format!(
        "{} sentences, {} math segments\n",
        doc.sentence_count(),
        segments.len()
    );
    for (identifier, found) in &candidates {
        if found.is_empty() {
            continue;
        }
        out.push_str(&format!("{identifier}:\n"));
        for c in found {
            out.push_str(&format!("  {:<20} {:.4}\n", c.definiens, c.score));
        }
    }
    for (index, source, outcome) in &segments {
        out.push_str(&format!("[{index}] {source}\n"));
        match outcome {
            Ok(fused) => {
                for (path, t) in &fused.tags {
                    let mark = if t.decided { "=" } else { "?" };
                    out.push_str(&format!(
                        "  {path:?} {} {mark} {} ({:.3}, {:?})\n",
                        t.symbol,
                        t.top().sense_id,
                        t.top().score,
                        t.provenance
                    ));
                }
            }
            Err(error) => out.push_str(&format!("  error: {error}\n")),
        }
    }
    Ok(out)
}

/// Find the symbols that stay free during evaluation by probing with an
/// empty binding and growing it on every unbound-symbol error.
fn free_variables(target: &EvalTarget) -> Result<Vec<String>, CliError> {
    let mut binding = Binding::new();
    for _ in 0..64 {
        match target.eval(&binding) {
            Ok(_) => break,
            Err(NumericError::UnboundSymbol(name)) => {
                binding.insert(name, num_complex::Complex64::new(0.5, 0.25));
            }
            // poles etc. at the probe point are fine; the sampler resamples
            Err(_) => break,
        }
    }
    Ok(binding.into_keys().collect())
}

fn cmd_verify(
    expression: &str,
    dialect: Dialect,
    sampler: &Sampler,
    region: SampleRegion,
    tolerance: f64,
    settings: &Settings,
    as_json: bool,
) -> Result<String, CliError> {
    let tagged = tag_expression(expression, settings)?;
    let report = translate(&tagged, &settings.lexicon, dialect)
        .map_err(|e| CliError::Domain(e.to_string()))?;
    let semantic = EvalTarget::Semantic {
        tagged: &tagged,
        lexicon: &settings.lexicon,
    };
    let cas = EvalTarget::Cas {
        expr: &report.output,
        renames: &report.var_map,
    };
    let vars = free_variables(&semantic)?;
    let equivalence = check_equivalence(&semantic, &cas, &vars, sampler, tolerance, region)
        .map_err(|e| CliError::Domain(e.to_string()))?;
    let output = if as_json {
        pretty(&json!({
            "dialect": dialect.name(),
            "translation": report.output.rendered,
            "variables": vars,
            "equivalence": equivalence,
        }))
    } else {
        format!(
            "{}\n{} over {} samples (max relative deviation {:.3e}, tol {:.1e})\n",
            report.output.rendered,
            if equivalence.pass { "PASS" } else { "FAIL" },
            equivalence.samples,
            equivalence.max_relative_deviation,
            equivalence.tolerance,
        )
    };
    if equivalence.pass {
        Ok(output)
    } else {
        // still print the report before signalling failure
        print!("{output}");
        Err(CliError::Domain("verification failed".into()))
    }
}

fn cmd_probe(
    expression: &str,
    var: &str,
    radius: f64,
    samples: usize,
    settings: &Settings,
    as_json: bool,
) -> Result<String, CliError> {
    let tagged = tag_expression(expression, settings)?;
    let target = EvalTarget::Semantic {
        tagged: &tagged,
        lexicon: &settings.lexicon,
    };
    let (report, trace) = probe_branch_cuts(&target, var, radius, samples);
    if as_json {
        return Ok(pretty(&json!({
            "report": report,
            "csv": probe_csv(&trace),
        })));
    }
    let mut out = format!(
        "r = {radius}, {} samples: {} jump(s), {} gap(s)\n",
        report.curve.samples,
        report.jumps.len(),
        report.gaps.len()
    );
    for jump in &report.jumps {
        out.push_str(&format!(
            "  jump at angle {:.4} rad, magnitude {:.4}\n",
            jump.angle, jump.magnitude
        ));
    }
    out.push_str(if report.continuous {
        "continuous on the probed circle\n"
    } else {
        "branch cut detected\n"
    });
    Ok(out)
}

fn cmd_eval_gold(
    gold: Option<&PathBuf>,
    cutoff: f64,
    settings: &Settings,
    as_json: bool,
) -> Result<String, CliError> {
    let cases = match gold {
        Some(path) => load_gold(path).map_err(|e| CliError::Usage(e.to_string()))?,
        None => harness::bundled_gold(),
    };
    let mut definiens_rows = Vec::new();
    let mut sense_rows = Vec::new();
    for case in &cases {
        let prediction = predict_case(
            case,
            &settings.lexicon,
            &settings.weights,
            &settings.context,
            &settings.nouns,
        )
        .map_err(|e| CliError::Domain(e.to_string()))?;
        definiens_rows.push((
            case.id.clone(),
            evaluate_definiens(&prediction.definiens, case, cutoff),
        ));
        sense_rows.push((
            case.id.clone(),
            evaluate_senses(&prediction.senses, case)
                .map_err(|e| CliError::Domain(e.to_string()))?,
        ));
    }
    let definiens = CorpusReport::new(definiens_rows);
    let senses = CorpusReport::new(sense_rows);
    if as_json {
        return Ok(pretty(&json!({
            "cutoff": cutoff,
            "definiens": definiens,
            "senses": senses,
        })));
    }
    Ok(format!(
        "identifier-definiens (cutoff {cutoff}):\n{}\nsense assignment:\n{}",
        definiens.table(),
        senses.table()
    ))
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> u8 {
        let argv: Vec<String> = std::iter::once("mathsem")
            .chain(args.iter().copied())
            .map(String::from)
            .collect();
        run(&argv)
    }

    #[test]
    fn parse_succeeds_on_valid_input() {
        assert_eq!(run_args(&["parse", "x^2 + 1"]), EXIT_OK);
    }

    #[test]
    fn parse_rejects_unbalanced_input() {
        assert_eq!(run_args(&["parse", "(x"]), EXIT_DOMAIN);
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run_args(&["frobnicate"]), EXIT_USAGE);
    }

    #[test]
    fn help_exits_cleanly() {
        assert_eq!(run_args(&["--help"]), EXIT_OK);
    }

    #[test]
    fn translate_decided_expression() {
        assert_eq!(
            run_args(&["translate", "\\JacobiP{\\alpha}{\\beta}{n}@{x}", "--to", "maple"]),
            EXIT_OK
        );
    }

    #[test]
    fn translate_undecided_symbols_fail_with_domain_code() {
        // E, m, and c all stay ambiguous without context
        assert_eq!(run_args(&["translate", "E=mc^2", "--to", "maple"]), EXIT_DOMAIN);
    }

    #[test]
    fn verify_jacobi_round_trip() {
        assert_eq!(
            run_args(&[
                "verify",
                "\\JacobiP{1}{2}{3}@{x}",
                "--to",
                "mathematica",
                "--samples",
                "25",
            ]),
            EXIT_OK
        );
    }

    #[test]
    fn probe_sqrt_square_finds_cuts_but_exits_zero() {
        assert_eq!(
            run_args(&[
                "probe",
                "\\sqrt{z^2}",
                "--var",
                "z",
                "--radius",
                "2.5",
                "--samples",
                "1024",
            ]),
            EXIT_OK
        );
    }

    #[test]
    fn eval_gold_runs_on_bundled_corpus() {
        assert_eq!(run_args(&["eval-gold"]), EXIT_OK);
    }

    #[test]
    fn missing_config_file_is_usage_error() {
        assert_eq!(
            run_args(&["--config", "/nonexistent/mathsem.json", "parse", "x"]),
            EXIT_USAGE
        );
    }

    #[test]
    fn config_file_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mathsem.json");
        std::fs::write(&path, r#"{"weights": {"tau": 0.99}, "tolerance": 1e-8}"#).unwrap();
        let settings = load_settings(Some(&path)).unwrap();
        assert_eq!(settings.weights.tau, 0.99);
        assert_eq!(settings.tolerance, 1e-8);
        // untouched fields keep their defaults
        assert_eq!(settings.weights.w_sig, 2.0);
        assert_eq!(settings.cutoff, 0.3);
    }

    #[test]
    fn bad_config_field_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mathsem.json");
        std::fs::write(&path, r#"{"no_such_field": 1}"#).unwrap();
        assert!(load_settings(Some(&path)).is_err());
    }

    #[test]
    fn out_flag_writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tree.json");
        let code = run_args(&[
            "--json",
            "--out",
            path.to_str().unwrap(),
            "parse",
            "\\alpha + 1",
        ]);
        assert_eq!(code, EXIT_OK);
        let written = std::fs::read_to_string(&path).unwrap();
        assert!(written.contains("\"alpha\""), "{written}");
    }

    #[test]
    fn analyze_text_only_document_is_empty_report() {
        assert_eq!(run_args(&["analyze", "no math here at all"]), EXIT_OK);
    }

    #[test]
    fn analyze_continues_past_broken_segments() {
        // the first segment fails to parse; the second still gets tagged
        assert_eq!(run_args(&["analyze", r"bad $($ but good $\gamma$"]), EXIT_OK);
    }

    #[test]
    fn analyze_epsilon_fixture() {
        let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/data/fixtures/dlmf15.txt");
        assert_eq!(run_args(&["analyze", "--file", fixture]), EXIT_OK);
    }
}
