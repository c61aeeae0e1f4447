//! Complex-plane evaluation of semantic trees and CAS expressions,
//! sample-based equivalence checking, and branch-cut probing along circles.
//!
//! All multi-valued kernels use principal branches: `log` cuts the negative
//! real axis, `sqrt z = exp(½ log z)`, `z^w = exp(w log z)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::lexicon::{Lexicon, Role, Sense};
use crate::mst::{MathTree, NodeKind};
use crate::tagger::TaggedTree;
use crate::translator::{CasExpression, CasNode};

pub type ComplexValue = Complex64;

/// Values for the free symbols of the expression under evaluation.
pub type Binding = BTreeMap<String, Complex64>;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("unbound symbol {0}")]
    UnboundSymbol(String),
    #[error("pole or singular value in {0}")]
    Pole(String),
    #[error("unsupported function {0}")]
    UnsupportedFunction(String),
    #[error("Jacobi polynomial degree must be a non-negative integer, got {0}")]
    NegativeDegree(String),
    #[error("sampling failed after {attempts} attempts: {last}")]
    SamplingFailed { attempts: usize, last: String },
}

/// One side of an equivalence check: a tagged semantic tree or a parsed
/// CAS expression together with the variable renaming its translation
/// applied (LaTeX symbol → emitted CAS name).
pub enum EvalTarget<'a> {
    Semantic {
        tagged: &'a TaggedTree,
        lexicon: &'a Lexicon,
    },
    Cas {
        expr: &'a CasExpression,
        renames: &'a BTreeMap<String, String>,
    },
}

impl EvalTarget<'_> {
    /// Evaluate with bindings keyed by LaTeX symbol names.
    pub fn eval(&self, binding: &Binding) -> Result<Complex64, NumericError> {
        match self {
            EvalTarget::Semantic { tagged, lexicon } => eval_tagged(tagged, lexicon, binding),
            EvalTarget::Cas { expr, renames } => {
                let mut renamed = Binding::new();
                for (k, v) in binding {
                    let key = renames.get(k).cloned().unwrap_or_else(|| k.clone());
                    renamed.insert(key, *v);
                }
                eval_cas(&expr.tree, binding_dialect(expr), &renamed)
            }
        }
    }
}

fn binding_dialect(expr: &CasExpression) -> crate::lexicon::Dialect {
    expr.dialect
}

/// Evaluate a fully decided semantic tree.
pub fn eval_tagged(
    tagged: &TaggedTree,
    lexicon: &Lexicon,
    binding: &Binding,
) -> Result<Complex64, NumericError> {
    let mut ev = SemEval {
        tagged,
        lexicon,
        binding,
    };
    ev.eval(&tagged.tree, &mut Vec::new())
}

struct SemEval<'a> {
    tagged: &'a TaggedTree,
    lexicon: &'a Lexicon,
    binding: &'a Binding,
}

impl<'a> SemEval<'a> {
    fn sense_at(&self, path: &[usize]) -> Option<(&'a str, Option<&'a Sense>)> {
        let tag = self.tagged.tags.get(path)?;
        let id = tag.decided_sense()?;
        let sense = self
            .lexicon
            .lookup(&tag.symbol)
            .and_then(|e| e.senses.iter().find(|s| s.id == id))
            .or_else(|| self.lexicon.sense_by_id(id));
        Some((id, sense))
    }

    fn eval(&mut self, node: &MathTree, path: &mut Vec<usize>) -> Result<Complex64, NumericError> {
        match &node.kind {
            NodeKind::Number(n) => n
                .parse::<f64>()
                .map(Complex64::from)
                .map_err(|_| NumericError::UnsupportedFunction(format!("number literal {n}"))),
            NodeKind::Operator(c) => Err(NumericError::UnsupportedFunction(format!(
                "stray operator {c}"
            ))),
            NodeKind::Identifier(name) => self.eval_symbol(name, path, None, None, None),
            NodeKind::Scripted { base, sub, sup } => match &base.kind {
                NodeKind::Identifier(name) => {
                    let name = name.clone();
                    self.eval_symbol(&name, path, sub.as_deref(), sup.as_deref(), None)
                }
                _ => {
                    let b = self.child(base, path, 0)?;
                    self.apply_scripts(b, sub.as_deref(), sup.as_deref(), path)
                }
            },
            NodeKind::BinaryOp { op, left, right } => {
                let l = self.child(left, path, 0)?;
                let r = self.child(right, path, 1)?;
                match op {
                    '+' => Ok(l + r),
                    '-' => Ok(l - r),
                    '*' | '·' => Ok(l * r),
                    '/' => {
                        if r.norm() == 0.0 {
                            Err(NumericError::Pole("division by zero".into()))
                        } else {
                            Ok(l / r)
                        }
                    }
                    other => Err(NumericError::UnsupportedFunction(format!(
                        "relation or operator {other}"
                    ))),
                }
            }
            NodeKind::Apply { head, args } => {
                // heads are resolved through their tag like any identifier
                let _ = (head, args);
                Err(NumericError::UnsupportedFunction("explicit apply".into()))
            }
            NodeKind::Fenced { body, .. } => self.child(body, path, 0),
            NodeKind::Sequence(items) => self.eval_sequence(items, path),
            NodeKind::Frac { num, den } => {
                let n = self.child(num, path, 0)?;
                let d = self.child(den, path, 1)?;
                if d.norm() == 0.0 {
                    Err(NumericError::Pole("division by zero".into()))
                } else {
                    Ok(n / d)
                }
            }
            NodeKind::Sqrt { degree, body } => {
                let body_index = usize::from(degree.is_some());
                let b = self.child(body, path, body_index)?;
                match degree {
                    None => Ok(principal_sqrt(b)),
                    Some(d) => {
                        let deg = self.child(d, path, 0)?;
                        principal_pow(b, Complex64::new(1.0, 0.0) / deg)
                    }
                }
            }
            NodeKind::SemanticMacro { name, params, args } => {
                let (id, _) = self
                    .sense_at(path)
                    .ok_or_else(|| NumericError::UnsupportedFunction(format!("\\{name}")))?;
                let id = id.to_string();
                let mut p = Vec::new();
                for (i, node) in params.iter().enumerate() {
                    p.push(self.child(node, path, i)?);
                }
                let mut a = Vec::new();
                for (i, node) in args.iter().enumerate() {
                    a.push(self.child(node, path, params.len() + i)?);
                }
                apply_sense_kernel(&id, &p, &a)
            }
        }
    }

    fn child(
        &mut self,
        node: &MathTree,
        path: &mut Vec<usize>,
        index: usize,
    ) -> Result<Complex64, NumericError> {
        path.push(index);
        let v = self.eval(node, path);
        path.pop();
        v
    }

    /// Script operands and function arguments are tagged at their own
    /// paths; find a subtree's path by identity.
    fn eval_detached(&mut self, node: &MathTree) -> Result<Complex64, NumericError> {
        for (p, n) in self.tagged.tree.walk() {
            if std::ptr::eq(n, node) {
                let mut p = p;
                return self.eval(node, &mut p);
            }
        }
        self.eval(node, &mut Vec::new())
    }

    fn eval_symbol(
        &mut self,
        name: &str,
        path: &mut Vec<usize>,
        sub: Option<&MathTree>,
        sup: Option<&MathTree>,
        trailing_args: Option<&[Complex64]>,
    ) -> Result<Complex64, NumericError> {
        let resolved = self.sense_at(path).map(|(id, s)| (id.to_string(), s));
        match resolved {
            Some((id, Some(sense))) if sense.role == Role::Function => {
                let mut p = Vec::new();
                if let Some(sup) = sup {
                    for part in comma_parts(sup) {
                        p.push(self.eval_detached(part)?);
                    }
                }
                if let Some(sub) = sub {
                    for part in comma_parts(sub) {
                        p.push(self.eval_detached(part)?);
                    }
                }
                apply_sense_kernel(&id, &p, trailing_args.unwrap_or(&[]))
            }
            Some((id, _)) if id.starts_with("const:") => {
                let v = match id.as_str() {
                    "const:EulerMascheroni" => Complex64::from(EULER_GAMMA),
                    "const:EulerNumber" => Complex64::from(std::f64::consts::E),
                    "const:Pi" => Complex64::from(PI),
                    // ε-style "constants" stay free symbols
                    _ => self.lookup(name)?,
                };
                self.apply_scripts(v, sub, sup, path)
            }
            _ => {
                let v = self.lookup(name)?;
                self.apply_scripts(v, sub, sup, path)
            }
        }
    }

    fn lookup(&self, name: &str) -> Result<Complex64, NumericError> {
        self.binding
            .get(name)
            .copied()
            .ok_or_else(|| NumericError::UnboundSymbol(name.to_string()))
    }

    fn apply_scripts(
        &mut self,
        base: Complex64,
        sub: Option<&MathTree>,
        sup: Option<&MathTree>,
        _path: &mut Vec<usize>,
    ) -> Result<Complex64, NumericError> {
        if sub.is_some() {
            return Err(NumericError::UnsupportedFunction(
                "subscripted value".into(),
            ));
        }
        match sup {
            None => Ok(base),
            Some(sup) => {
                let e = self.eval_detached(sup)?;
                principal_pow(base, e)
            }
        }
    }

    fn eval_sequence(
        &mut self,
        items: &[MathTree],
        path: &mut Vec<usize>,
    ) -> Result<Complex64, NumericError> {
        let mut product = Complex64::from(1.0);
        let mut sign = 1.0;
        let mut i = 0;
        while i < items.len() {
            match &items[i].kind {
                NodeKind::Operator('-') => {
                    sign = -sign;
                    i += 1;
                    continue;
                }
                NodeKind::Operator('+') => {
                    i += 1;
                    continue;
                }
                NodeKind::Operator(c) => {
                    return Err(NumericError::UnsupportedFunction(format!(
                        "operator {c} in product"
                    )));
                }
                _ => {}
            }
            // function application across sibling pairs, as in translation
            let head = match &items[i].kind {
                NodeKind::Identifier(s) => Some((s.clone(), None, None)),
                NodeKind::Scripted { base, sub, sup } => match &base.kind {
                    NodeKind::Identifier(s) => Some((s.clone(), sub.as_deref(), sup.as_deref())),
                    _ => None,
                },
                _ => None,
            };
            let next_fenced = items.get(i + 1).and_then(|n| match &n.kind {
                NodeKind::Fenced { open: '(', body, .. } => Some(body.as_ref()),
                _ => None,
            });
            if let (Some((name, sub, sup)), Some(fenced)) = (&head, next_fenced) {
                path.push(i);
                let is_function = self
                    .sense_at(path)
                    .and_then(|(_, s)| s)
                    .map(|s| s.role == Role::Function && s.signature.args > 0)
                    .unwrap_or(false);
                if is_function {
                    let mut args = Vec::new();
                    for part in comma_parts(fenced) {
                        args.push(self.eval_detached(part)?);
                    }
                    let v = self.eval_symbol(name, path, *sub, *sup, Some(&args))?;
                    path.pop();
                    product *= v;
                    i += 2;
                    continue;
                }
                path.pop();
            }
            path.push(i);
            let v = self.eval(&items[i], path);
            path.pop();
            product *= v?;
            i += 1;
        }
        Ok(product * sign)
    }
}

fn comma_parts(tree: &MathTree) -> Vec<&MathTree> {
    match &tree.kind {
        NodeKind::Fenced { body, .. } => comma_parts(body),
        NodeKind::Sequence(items)
            if items.iter().any(|i| matches!(i.kind, NodeKind::Operator(','))) =>
        {
            items
                .iter()
                .filter(|i| !matches!(i.kind, NodeKind::Operator(',')))
                .collect()
        }
        _ => vec![tree],
    }
}

/// Dispatch a decided sense to its numeric kernel, placeholder-ordered
/// params first.
fn apply_sense_kernel(
    sense_id: &str,
    params: &[Complex64],
    args: &[Complex64],
) -> Result<Complex64, NumericError> {
    let arg = |i: usize| -> Result<Complex64, NumericError> {
        args.get(i)
            .copied()
            .ok_or_else(|| NumericError::UnsupportedFunction(format!("{sense_id}: missing arg")))
    };
    match sense_id {
        "dlmf:cos" => Ok(arg(0)?.cos()),
        "dlmf:sin" => Ok(arg(0)?.sin()),
        "dlmf:exp" => Ok(arg(0)?.exp()),
        "dlmf:log" => principal_log(arg(0)?),
        "dlmf:JacobiP" => {
            // placeholder order: p0 = α, p1 = β, p2 = n
            if params.len() != 3 {
                return Err(NumericError::UnsupportedFunction(
                    "JacobiP expects three parameters".into(),
                ));
            }
            let n = integer_degree(params[2])?;
            jacobi_p(n, params[0], params[1], arg(0)?)
        }
        other => Err(NumericError::UnsupportedFunction(other.to_string())),
    }
}

fn integer_degree(z: Complex64) -> Result<u32, NumericError> {
    let n = z.re.round();
    if z.im.abs() > 1e-9 || (z.re - n).abs() > 1e-9 || n < 0.0 {
        return Err(NumericError::NegativeDegree(format!("{z}")));
    }
    Ok(n as u32)
}

/// Evaluate a parsed CAS expression; bindings keyed by CAS names.
pub fn eval_cas(
    node: &CasNode,
    dialect: crate::lexicon::Dialect,
    binding: &Binding,
) -> Result<Complex64, NumericError> {
    use crate::lexicon::Dialect::*;
    match node {
        CasNode::Number(n) => n
            .parse::<f64>()
            .map(Complex64::from)
            .map_err(|_| NumericError::UnsupportedFunction(format!("number literal {n}"))),
        CasNode::Symbol(name) => match (dialect, name.as_str()) {
            (Maple, "gamma") | (Mathematica, "EulerGamma") => Ok(Complex64::from(EULER_GAMMA)),
            (Mathematica, "E") => Ok(Complex64::from(std::f64::consts::E)),
            (_, "Pi") => Ok(Complex64::from(PI)),
            (_, "I") => Ok(Complex64::new(0.0, 1.0)),
            _ => binding
                .get(name)
                .copied()
                .ok_or_else(|| NumericError::UnboundSymbol(name.clone())),
        },
        CasNode::BinOp(op, l, r) => {
            let l = eval_cas(l, dialect, binding)?;
            let r = eval_cas(r, dialect, binding)?;
            match op {
                '+' => Ok(l + r),
                '-' => Ok(l - r),
                '*' => Ok(l * r),
                '/' => {
                    if r.norm() == 0.0 {
                        Err(NumericError::Pole("division by zero".into()))
                    } else {
                        Ok(l / r)
                    }
                }
                '^' => principal_pow(l, r),
                other => Err(NumericError::UnsupportedFunction(format!("operator {other}"))),
            }
        }
        CasNode::Call(name, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_cas(a, dialect, binding)?);
            }
            let unary = |vals: &[Complex64]| -> Result<Complex64, NumericError> {
                vals.first().copied().ok_or_else(|| {
                    NumericError::UnsupportedFunction(format!("{name}: missing argument"))
                })
            };
            match (dialect, name.as_str()) {
                (_, "neg") => Ok(-unary(&vals)?),
                (Maple, "cos") | (Mathematica, "Cos") => Ok(unary(&vals)?.cos()),
                (Maple, "sin") | (Mathematica, "Sin") => Ok(unary(&vals)?.sin()),
                (Maple, "exp") | (Mathematica, "Exp") => Ok(unary(&vals)?.exp()),
                (Maple, "ln") | (Mathematica, "Log") => principal_log(unary(&vals)?),
                (Maple, "sqrt") | (Mathematica, "Sqrt") => Ok(principal_sqrt(unary(&vals)?)),
                (Maple, "GAMMA") | (Mathematica, "Gamma") => gamma(unary(&vals)?),
                (_, "JacobiP") => {
                    if vals.len() != 4 {
                        return Err(NumericError::UnsupportedFunction(
                            "JacobiP expects four arguments".into(),
                        ));
                    }
                    let n = integer_degree(vals[0])?;
                    jacobi_p(n, vals[1], vals[2], vals[3])
                }
                _ => Err(NumericError::UnsupportedFunction(name.clone())),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// kernels

pub fn principal_log(z: Complex64) -> Result<Complex64, NumericError> {
    if z.norm() == 0.0 {
        return Err(NumericError::Pole("log 0".into()));
    }
    Ok(z.ln())
}

pub fn principal_sqrt(z: Complex64) -> Complex64 {
    z.sqrt()
}

pub fn principal_pow(base: Complex64, exp: Complex64) -> Result<Complex64, NumericError> {
    if base.norm() == 0.0 {
        return if exp.norm() == 0.0 {
            Ok(Complex64::from(1.0))
        } else if exp.im == 0.0 && exp.re > 0.0 {
            Ok(Complex64::from(0.0))
        } else {
            Err(NumericError::Pole("0 raised to a non-positive power".into()))
        };
    }
    Ok(base.powc(exp))
}

/// Jacobi polynomial by the standard three-term recurrence,
/// seeded P0 = 1, P1 = (α+1) + (α+β+2)(x−1)/2.
pub fn jacobi_p(n: u32, alpha: Complex64, beta: Complex64, x: Complex64) -> Result<Complex64, NumericError> {
    let one = Complex64::from(1.0);
    if n == 0 {
        return Ok(one);
    }
    let mut prev = one;
    let mut cur = (alpha + 1.0) + (alpha + beta + 2.0) * (x - 1.0) / 2.0;
    for k in 2..=u64::from(n) {
        let k = k as f64;
        let ab = alpha + beta;
        let c1 = 2.0 * k * (ab + k) * (ab + 2.0 * k - 2.0);
        let c2 = (ab + 2.0 * k - 1.0) * (alpha * alpha - beta * beta);
        let c3 = (ab + 2.0 * k - 1.0) * (ab + 2.0 * k) * (ab + 2.0 * k - 2.0);
        let c4 = 2.0 * (alpha + k - 1.0) * (beta + k - 1.0) * (ab + 2.0 * k);
        if c1.norm() == 0.0 {
            return Err(NumericError::Pole(format!(
                "Jacobi recurrence degenerate at k={k}"
            )));
        }
        let next = ((c2 + c3 * x) * cur - c4 * prev) / c1;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Lanczos coefficients, g = 7, n = 9 (Godfrey's published set).
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via the Lanczos approximation with reflection for
/// Re z < 0.5.
pub fn gamma(z: Complex64) -> Result<Complex64, NumericError> {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(NumericError::Pole(format!("gamma pole at {}", z.re)));
    }
    if z.re < 0.5 {
        // Γ(z) Γ(1−z) = π / sin(πz)
        let s = (PI * z).sin();
        if s.norm() == 0.0 {
            return Err(NumericError::Pole("gamma reflection at integer".into()));
        }
        return Ok(Complex64::from(PI) / (s * gamma(Complex64::from(1.0) - z)?));
    }
    let z = z - 1.0;
    let mut acc = Complex64::from(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    let two_pi_sqrt = (2.0 * PI).sqrt();
    Ok(two_pi_sqrt * t.powc(z + 0.5) * (-t).exp() * acc)
}

// ---------------------------------------------------------------------------
// equivalence checking

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sampler {
    pub seed: u64,
    pub count: usize,
    pub radius: f64,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler {
            seed: 42,
            count: 100,
            radius: 2.5,
        }
    }
}

/// Sampling region for equivalence checks; the right half-disk avoids
/// cuts along the imaginary axis (e.g. sqrt(z²) vs z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleRegion {
    #[default]
    Disk,
    RightHalfDisk,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub pass: bool,
    pub samples: usize,
    pub tolerance: f64,
    pub max_relative_deviation: f64,
    /// Worst sample, present when the check fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_binding: Option<BTreeMap<String, (f64, f64)>>,
}

/// Compare two evaluation targets at seeded random complex points.
/// Evaluation errors (poles, cuts) are skipped by resampling, up to
/// 10 attempts per sample.
pub fn check_equivalence(
    a: &EvalTarget,
    b: &EvalTarget,
    vars: &[String],
    sampler: &Sampler,
    tolerance: f64,
    region: SampleRegion,
) -> Result<EquivalenceReport, NumericError> {
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let mut max_dev = 0.0_f64;
    let mut worst: Option<Binding> = None;
    for _ in 0..sampler.count {
        let mut last_err = String::new();
        let mut ok = false;
        for _attempt in 0..10 {
            let binding = sample_binding(&mut rng, vars, sampler.radius, region);
            let va = a.eval(&binding);
            let vb = b.eval(&binding);
            match (va, vb) {
                (Ok(va), Ok(vb)) if va.is_finite() && vb.is_finite() => {
                    let scale = va.norm().max(vb.norm()).max(1.0);
                    let dev = (va - vb).norm() / scale;
                    if dev > max_dev {
                        max_dev = dev;
                        worst = Some(binding);
                    }
                    ok = true;
                    break;
                }
                (Err(e), _) | (_, Err(e)) => last_err = e.to_string(),
                _ => last_err = "non-finite value".into(),
            }
        }
        if !ok {
            return Err(NumericError::SamplingFailed {
                attempts: 10,
                last: last_err,
            });
        }
    }
    let pass = max_dev <= tolerance;
    Ok(EquivalenceReport {
        pass,
        samples: sampler.count,
        tolerance,
        max_relative_deviation: max_dev,
        worst_binding: if pass {
            None
        } else {
            worst.map(|b| b.into_iter().map(|(k, v)| (k, (v.re, v.im))).collect())
        },
    })
}

trait IsFinite {
    fn is_finite(&self) -> bool;
}

impl IsFinite for Complex64 {
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

fn sample_binding(
    rng: &mut ChaCha8Rng,
    vars: &[String],
    radius: f64,
    region: SampleRegion,
) -> Binding {
    let mut binding = Binding::new();
    for v in vars {
        // rejection sampling keeps the draw uniform over the region
        let z = loop {
            let re = rng.gen_range(-radius..=radius);
            let im = rng.gen_range(-radius..=radius);
            let z = Complex64::new(re, im);
            if z.norm() > radius {
                continue;
            }
            if region == SampleRegion::RightHalfDisk && re <= 0.0 {
                continue;
            }
            break z;
        };
        binding.insert(v.clone(), z);
    }
    binding
}

// ---------------------------------------------------------------------------
// branch-cut probing

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub radius: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Jump {
    /// Midpoint angle between the samples that straddle the cut, in [0, 2π).
    pub angle: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub curve: Curve,
    pub jumps: Vec<Jump>,
    /// Angles where evaluation failed (recorded as gaps, not jumps).
    pub gaps: Vec<f64>,
    pub continuous: bool,
}

/// One evaluated point on the circle, for CSV export.
pub type ProbeTrace = Vec<(f64, Option<Complex64>)>;

/// Walk the circle |z| = r, flagging a jump between consecutive samples
/// when the step exceeds 10 · max(|f(k)|, |f(k+1)|, 1) · (2π/N).
pub fn probe_branch_cuts(
    target: &EvalTarget,
    var: &str,
    radius: f64,
    samples: usize,
) -> (ProbeReport, ProbeTrace) {
    let n = samples.max(2);
    let mut trace: ProbeTrace = Vec::with_capacity(n);
    for k in 0..n {
        let phi = 2.0 * PI * k as f64 / n as f64;
        let z = Complex64::from_polar(radius, phi);
        let mut binding = Binding::new();
        binding.insert(var.to_string(), z);
        let value = target.eval(&binding).ok().filter(IsFinite::is_finite);
        trace.push((phi, value));
    }
    let step = 2.0 * PI / n as f64;
    let mut jumps = Vec::new();
    let mut gaps = Vec::new();
    for k in 0..n {
        let (phi_a, va) = trace[k];
        let (phi_b, vb) = trace[(k + 1) % n];
        let midpoint = if k + 1 == n {
            ((phi_a + 2.0 * PI) / 2.0 + PI).rem_euclid(2.0 * PI)
        } else {
            (phi_a + phi_b) / 2.0
        };
        match (va, vb) {
            (Some(va), Some(vb)) => {
                let scale = va.norm().max(vb.norm()).max(1.0);
                let diff = (va - vb).norm();
                if diff > 10.0 * scale * step {
                    jumps.push(Jump {
                        angle: midpoint,
                        magnitude: diff,
                    });
                }
            }
            _ => gaps.push(midpoint),
        }
    }
    let report = ProbeReport {
        curve: Curve {
            radius,
            samples: n,
        },
        continuous: jumps.is_empty(),
        jumps,
        gaps,
    };
    (report, trace)
}

/// `phi,re,im` rows for external plotting; failed samples leave the value
/// columns empty.
pub fn probe_csv(trace: &ProbeTrace) -> String {
    let mut out = String::from("phi,re,im\n");
    for (phi, value) in trace {
        match value {
            Some(v) => out.push_str(&format!("{phi},{},{}\n", v.re, v.im)),
            None => out.push_str(&format!("{phi},,\n")),
        }
    }
    out
}
