//! Holomorphic expressions in one complex variable `z`, optionally indexed
//! by an integer family parameter `k`.
//!
//! Expressions are parsed once into an immutable tree. Evaluation works on
//! the Riemann sphere: a nonzero quantity divided by zero is `∞`, and the
//! genuinely undefined forms (`0/0`, `∞ - ∞`, `0·∞`, `∞/∞`) are reported as
//! [`Error::Indeterminate`] instead of being resolved silently.
//!
//! ```
//! use punctlab::fnexpr::HoloExpr;
//! use num_complex::Complex64;
//!
//! let f = HoloExpr::parse("exp(1/z)").unwrap();
//! let w = f.eval(Complex64::new(1.0, 0.0), None).unwrap();
//! assert!((w.finite().unwrap().re - std::f64::consts::E).abs() < 1e-15);
//! assert_eq!(f.derivative().to_string(), "-exp(1/z)/z^2");
//! ```

mod build;
mod parser;

use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sphere::{spherical_density, SpherePoint};

/// Expression tree node.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(Complex64),
    Z,
    K,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Exp(Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
}

/// A parsed holomorphic (meromorphic) expression.
#[derive(Clone, Debug)]
pub struct HoloExpr {
    root: Node,
    source_text: String,
    deriv: OnceLock<Node>,
}

impl PartialEq for HoloExpr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

fn mentions(n: &Node, leaf: &Node) -> bool {
    match n {
        Node::K | Node::Z | Node::Const(_) => n == leaf,
        Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Sin(a) | Node::Cos(a) => mentions(a, leaf),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            mentions(a, leaf) || mentions(b, leaf)
        }
    }
}

impl HoloExpr {
    pub fn parse(text: &str) -> Result<Self> {
        let root = parser::parse(text)?;
        Ok(Self::from_node(root, text.to_string()))
    }

    pub fn from_node(root: Node, source_text: String) -> Self {
        HoloExpr {
            root,
            source_text,
            deriv: OnceLock::new(),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    /// Whether the expression mentions the family parameter `k`.
    pub fn uses_k(&self) -> bool {
        mentions(&self.root, &Node::K)
    }

    /// Whether the expression mentions the variable `z`.
    pub fn uses_z(&self) -> bool {
        mentions(&self.root, &Node::Z)
    }

    /// Value at `z` on the Riemann sphere.
    pub fn eval(&self, z: Complex64, k: Option<i64>) -> Result<SpherePoint> {
        eval_node(&self.root, z, k)
    }

    fn derivative_node(&self) -> &Node {
        self.deriv.get_or_init(|| differentiate(&self.root))
    }

    /// Symbolic derivative with respect to `z`.
    pub fn derivative(&self) -> HoloExpr {
        let node = self.derivative_node().clone();
        let text = node_to_string(&node);
        HoloExpr::from_node(node, text)
    }

    /// Spherical derivative `f#(z) = 2|f'(z)| / (1 + |f(z)|^2)`.
    ///
    /// Where `f(z) = ∞` (a pole, or an overflowing value) the density is
    /// taken in the chart `1/f`, whose derivative is obtained from a central
    /// difference.
    pub fn spherical_derivative(&self, z: Complex64, k: Option<i64>) -> Result<f64> {
        let value = self.eval(z, k)?;
        if let SpherePoint::Finite(v) = value {
            match eval_node(self.derivative_node(), z, k) {
                Ok(SpherePoint::Finite(d)) => return Ok(spherical_density(v, d)),
                Ok(SpherePoint::Infinity) | Err(Error::Indeterminate { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        self.reciprocal_chart_density(z, k, value)
    }

    fn reciprocal_chart_density(&self, z: Complex64, k: Option<i64>, value: SpherePoint) -> Result<f64> {
        let h0 = value.recip();
        let step = if z.norm() > 0.0 { 1e-6 * z.norm() } else { 1e-6 };
        let recip_at = |dz: Complex64| -> Result<Complex64> {
            match self.eval(z + dz, k)?.recip() {
                SpherePoint::Finite(h) => Ok(h),
                // f vanishes next to the sample; the chart 1/f is not usable
                SpherePoint::Infinity => Err(Error::Indeterminate {
                    form: "0 and ∞ within one difference step",
                    z: z.to_string(),
                }),
            }
        };
        let dx = (recip_at(Complex64::new(step, 0.0))? - recip_at(Complex64::new(-step, 0.0))?) / (2.0 * step);
        let dy = (recip_at(Complex64::new(0.0, step))? - recip_at(Complex64::new(0.0, -step))?)
            / Complex64::new(0.0, 2.0 * step);
        let deriv = (dx + dy) * 0.5;
        match h0 {
            SpherePoint::Finite(h) => Ok(spherical_density(h, deriv)),
            SpherePoint::Infinity => unreachable!("value was infinite or finite and large"),
        }
    }
}

impl fmt::Display for HoloExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, 0)
    }
}

impl std::str::FromStr for HoloExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        HoloExpr::parse(s)
    }
}

// ---------------------------------------------------------------------------
// evaluation

fn indeterminate(form: &'static str, z: Complex64) -> Error {
    Error::Indeterminate {
        form,
        z: z.to_string(),
    }
}

const EXP_OVERFLOW: f64 = 709.78;
const EXP_UNDERFLOW: f64 = -745.2;

fn eval_node(n: &Node, z: Complex64, k: Option<i64>) -> Result<SpherePoint> {
    use SpherePoint::{Finite, Infinity};
    let zero = Complex64::new(0.0, 0.0);
    Ok(match n {
        Node::Const(c) => Finite(*c),
        Node::Z => Finite(z),
        Node::K => Finite(Complex64::new(k.ok_or(Error::MissingParameter)? as f64, 0.0)),
        Node::Neg(a) => match eval_node(a, z, k)? {
            Finite(v) => Finite(-v),
            Infinity => Infinity,
        },
        Node::Add(a, b) | Node::Sub(a, b) => {
            let (x, y) = (eval_node(a, z, k)?, eval_node(b, z, k)?);
            match (x, y) {
                (Finite(x), Finite(y)) => {
                    SpherePoint::from_complex(if matches!(n, Node::Add(..)) { x + y } else { x - y })
                }
                (Infinity, Infinity) => return Err(indeterminate("∞ ± ∞", z)),
                _ => Infinity,
            }
        }
        Node::Mul(a, b) => match (eval_node(a, z, k)?, eval_node(b, z, k)?) {
            (Finite(x), Finite(y)) => SpherePoint::from_complex(x * y),
            (Infinity, Finite(v)) | (Finite(v), Infinity) if v == zero => {
                return Err(indeterminate("0·∞", z))
            }
            _ => Infinity,
        },
        Node::Div(a, b) => match (eval_node(a, z, k)?, eval_node(b, z, k)?) {
            (Finite(x), Finite(y)) => {
                if y == zero {
                    if x == zero {
                        return Err(indeterminate("0/0", z));
                    }
                    Infinity
                } else {
                    SpherePoint::from_complex(scaled_div(x, y))
                }
            }
            (Finite(_), Infinity) => SpherePoint::ZERO,
            (Infinity, Finite(_)) => Infinity,
            (Infinity, Infinity) => return Err(indeterminate("∞/∞", z)),
        },
        Node::Pow(a, p) => {
            let p = *p;
            match eval_node(a, z, k)? {
                _ if p == 0 => Finite(Complex64::new(1.0, 0.0)),
                Infinity => {
                    if p > 0 {
                        Infinity
                    } else {
                        SpherePoint::ZERO
                    }
                }
                Finite(v) if v == zero && p < 0 => Infinity,
                Finite(v) => SpherePoint::from_complex(v.powi(p)),
            }
        }
        Node::Exp(a) => match eval_node(a, z, k)? {
            Infinity => return Err(Error::Essential { z: z.to_string() }),
            Finite(w) => exp_sphere(w),
        },
        Node::Sin(a) | Node::Cos(a) => match eval_node(a, z, k)? {
            Infinity => return Err(Error::Essential { z: z.to_string() }),
            Finite(w) => {
                if w.im.abs() > EXP_OVERFLOW {
                    Infinity
                } else if matches!(n, Node::Sin(_)) {
                    SpherePoint::from_complex(w.sin())
                } else {
                    SpherePoint::from_complex(w.cos())
                }
            }
        },
    })
}

/// `x / y` without the overflow of the textbook formula for large `|y|`.
pub(crate) fn scaled_div(x: Complex64, y: Complex64) -> Complex64 {
    let s = y.re.abs().max(y.im.abs());
    if !(1e-150..=1e150).contains(&s) {
        (x / s) / (y / s)
    } else {
        x / y
    }
}

fn exp_sphere(w: Complex64) -> SpherePoint {
    if w.re > EXP_OVERFLOW {
        SpherePoint::Infinity
    } else if w.re < EXP_UNDERFLOW {
        SpherePoint::ZERO
    } else {
        SpherePoint::from_complex(w.exp())
    }
}

// ---------------------------------------------------------------------------
// differentiation

fn differentiate(n: &Node) -> Node {
    use build::*;
    match n {
        Node::Const(_) | Node::K => real(0.0),
        Node::Z => real(1.0),
        Node::Neg(a) => neg(differentiate(a)),
        Node::Add(a, b) => add(differentiate(a), differentiate(b)),
        Node::Sub(a, b) => sub(differentiate(a), differentiate(b)),
        Node::Mul(a, b) => add(
            mul(differentiate(a), (**b).clone()),
            mul((**a).clone(), differentiate(b)),
        ),
        Node::Div(a, b) => {
            let db = differentiate(b);
            if matches!(**a, Node::Const(_) | Node::K) {
                neg(div(mul((**a).clone(), db), pow((**b).clone(), 2)))
            } else {
                div(
                    sub(mul(differentiate(a), (**b).clone()), mul((**a).clone(), db)),
                    pow((**b).clone(), 2),
                )
            }
        }
        Node::Pow(a, p) => mul(
            mul(real(*p as f64), pow((**a).clone(), p - 1)),
            differentiate(a),
        ),
        Node::Exp(a) => mul(Node::Exp(a.clone()), differentiate(a)),
        Node::Sin(a) => mul(Node::Cos(a.clone()), differentiate(a)),
        Node::Cos(a) => neg(mul(Node::Sin(a.clone()), differentiate(a))),
    }
}

// ---------------------------------------------------------------------------
// printing

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 5;

fn fmt_real(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn const_prec(c: Complex64) -> u8 {
    if c.im == 0.0 {
        if c.re.is_sign_negative() && c.re != 0.0 {
            PREC_UNARY
        } else {
            PREC_ATOM
        }
    } else if c.re == 0.0 {
        if c.im < 0.0 {
            PREC_UNARY
        } else {
            PREC_ATOM
        }
    } else {
        PREC_ATOM
    }
}

fn prec(n: &Node) -> u8 {
    match n {
        Node::Const(c) => const_prec(*c),
        Node::Add(..) | Node::Sub(..) => PREC_SUM,
        Node::Mul(..) | Node::Div(..) => PREC_PRODUCT,
        Node::Neg(_) => PREC_UNARY,
        Node::Pow(..) => 4,
        _ => PREC_ATOM,
    }
}

/// Whether the printed form of `n` begins with a minus sign.
fn starts_with_minus(n: &Node) -> bool {
    match n {
        Node::Const(c) => const_prec(*c) == PREC_UNARY,
        Node::Neg(_) => true,
        Node::Mul(a, _) | Node::Div(a, _) => prec(a) >= PREC_PRODUCT && starts_with_minus(a),
        Node::Add(a, _) | Node::Sub(a, _) => starts_with_minus(a),
        _ => false,
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        f.write_str(&fmt_real(c.re))
    } else if c.re == 0.0 {
        write!(f, "{}i", fmt_real(c.im))
    } else {
        let sign = if c.im < 0.0 { "-" } else { "+" };
        write!(f, "({}{}{}i)", fmt_real(c.re), sign, fmt_real(c.im.abs()))
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, n: &Node, parens: bool) -> fmt::Result {
    if parens {
        f.write_str("(")?;
        write_node(f, n, 0)?;
        f.write_str(")")
    } else {
        write_node(f, n, 0)
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, n: &Node, _ctx: u8) -> fmt::Result {
    match n {
        Node::Const(c) => write_const(f, *c),
        Node::Z => f.write_str("z"),
        Node::K => f.write_str("k"),
        Node::Neg(a) => {
            f.write_str("-")?;
            write_wrapped(f, a, prec(a) == PREC_SUM || starts_with_minus(a))
        }
        Node::Add(a, b) => {
            write_wrapped(f, a, false)?;
            f.write_str(" + ")?;
            write_wrapped(f, b, prec(b) <= PREC_SUM)
        }
        Node::Sub(a, b) => {
            write_wrapped(f, a, false)?;
            f.write_str(" - ")?;
            write_wrapped(f, b, prec(b) <= PREC_SUM)
        }
        Node::Mul(a, b) => {
            write_wrapped(f, a, prec(a) < PREC_PRODUCT)?;
            f.write_str("*")?;
            write_wrapped(f, b, prec(b) <= PREC_PRODUCT)
        }
        Node::Div(a, b) => {
            write_wrapped(f, a, prec(a) < PREC_PRODUCT)?;
            f.write_str("/")?;
            write_wrapped(f, b, prec(b) <= PREC_PRODUCT)
        }
        Node::Pow(a, p) => {
            write_wrapped(f, a, prec(a) < PREC_ATOM)?;
            write!(f, "^{p}")
        }
        Node::Exp(a) => {
            f.write_str("exp(")?;
            write_node(f, a, 0)?;
            f.write_str(")")
        }
        Node::Sin(a) => {
            f.write_str("sin(")?;
            write_node(f, a, 0)?;
            f.write_str(")")
        }
        Node::Cos(a) => {
            f.write_str("cos(")?;
            write_node(f, a, 0)?;
            f.write_str(")")
        }
    }
}

fn node_to_string(n: &Node) -> String {
    struct D<'a>(&'a Node);
    impl fmt::Display for D<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_node(f, self.0, 0)
        }
    }
    D(n).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn val(text: &str, z: Complex64, k: Option<i64>) -> SpherePoint {
        HoloExpr::parse(text).unwrap().eval(z, k).unwrap()
    }

    #[test]
    fn identity_and_literal_trees() {
        assert_eq!(HoloExpr::parse("z").unwrap().root(), &Node::Z);
        let e = HoloExpr::parse("exp(1/z)").unwrap();
        assert_eq!(
            e.root(),
            &Node::Exp(Box::new(Node::Div(
                Box::new(Node::Const(cx(1.0, 0.0))),
                Box::new(Node::Z)
            )))
        );
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(val("k*z", cx(2.0, 0.0), Some(3)), SpherePoint::Finite(cx(6.0, 0.0)));
        assert_eq!(val("z^2", cx(1.0, 1.0), None), SpherePoint::Finite(cx(0.0, 2.0)));
        assert_eq!(val("1/z", cx(0.0, 0.0), None), SpherePoint::Infinity);
        let e = val("exp(1/z)", cx(1.0, 0.0), None).finite().unwrap();
        assert!((e.re - std::f64::consts::E).abs() < 1e-15 && e.im == 0.0);
    }

    #[test]
    fn indeterminate_forms_are_reported() {
        let f = HoloExpr::parse("z/z").unwrap();
        assert!(matches!(f.eval(cx(0.0, 0.0), None), Err(Error::Indeterminate { .. })));
        let f = HoloExpr::parse("1/z - 1/z").unwrap();
        assert!(matches!(f.eval(cx(0.0, 0.0), None), Err(Error::Indeterminate { .. })));
        let f = HoloExpr::parse("z*(1/z)").unwrap();
        assert!(matches!(f.eval(cx(0.0, 0.0), None), Err(Error::Indeterminate { .. })));
        let f = HoloExpr::parse("exp(1/z)").unwrap();
        assert!(matches!(f.eval(cx(0.0, 0.0), None), Err(Error::Essential { .. })));
        let f = HoloExpr::parse("k*z").unwrap();
        assert_eq!(f.eval(cx(1.0, 0.0), None), Err(Error::MissingParameter));
    }

    #[test]
    fn overflow_goes_to_infinity_and_underflow_to_zero() {
        assert_eq!(val("exp(1/z)", cx(1e-6, 0.0), None), SpherePoint::Infinity);
        assert_eq!(val("exp(1/z)", cx(-1e-6, 0.0), None), SpherePoint::ZERO);
        assert_eq!(val("sin(z)", cx(0.0, 1000.0), None), SpherePoint::Infinity);
        assert_eq!(val("z^-1", cx(0.0, 0.0), None), SpherePoint::Infinity);
        assert_eq!(val("(1/z)^-2", cx(0.0, 0.0), None), SpherePoint::ZERO);
    }

    #[test]
    fn derivative_examples() {
        let d = |s: &str| HoloExpr::parse(s).unwrap().derivative().to_string();
        assert_eq!(d("z"), "1");
        assert_eq!(d("exp(1/z)"), "-exp(1/z)/z^2");
        assert_eq!(d("k*z^2"), "2*(k*z)");
        assert_eq!(d("3"), "0");
        assert_eq!(d("sin(2*z)"), "2*cos(2*z)");
        assert_eq!(d("cos(z)"), "-sin(z)");
    }

    #[test]
    fn printing_is_idempotent_on_tricky_inputs() {
        for src in [
            "z - (z - 1)",
            "-z^2",
            "(-2)^3",
            "1/(2*z)",
            "z*(1/z)",
            "(1+2i)*z",
            "-3i*z",
            "z^-2 + 1e-7",
            "-(-z)",
            "exp(-1/z)/(z - 0.5)^2",
            "2*(z+1)/(k*z)",
            "-(-2*z)",
            "-(-z)*3",
        ] {
            let p1 = HoloExpr::parse(src).unwrap();
            let s1 = p1.to_string();
            let p2 = HoloExpr::parse(&s1).unwrap();
            assert_eq!(p2.to_string(), s1, "source {src}");
            let z = cx(0.37, -0.81);
            assert_eq!(p1.eval(z, Some(2)).unwrap(), p2.eval(z, Some(2)).unwrap(), "{src}");
        }
    }

    #[test]
    fn spherical_derivative_examples() {
        let f = HoloExpr::parse("z").unwrap();
        assert_eq!(f.spherical_derivative(cx(0.0, 0.0), None).unwrap(), 2.0);
        let c = HoloExpr::parse("3+2i").unwrap();
        assert_eq!(c.spherical_derivative(cx(0.5, 0.5), None).unwrap(), 0.0);
        let e = HoloExpr::parse("exp(1/z)").unwrap();
        for t in [0.5, 0.1, 0.01, 1e-3] {
            let s = e.spherical_derivative(cx(0.0, t), None).unwrap();
            assert!((s - 1.0 / (t * t)).abs() <= 1e-12 / (t * t), "t={t}: {s}");
        }
        assert!(matches!(
            e.spherical_derivative(cx(0.0, 0.0), None),
            Err(Error::Essential { .. })
        ));
    }

    #[test]
    fn spherical_derivative_is_finite_at_poles() {
        // 1/z at 0: the chart 1/f = z has derivative 1, so f# = 2
        let f = HoloExpr::parse("1/z").unwrap();
        let s = f.spherical_derivative(cx(0.0, 0.0), None).unwrap();
        assert!((s - 2.0).abs() < 1e-9, "{s}");
        // 1/(z-1)^2 at 1: double pole, f# = 0
        let f = HoloExpr::parse("1/(z-1)^2").unwrap();
        assert!(f.spherical_derivative(cx(1.0, 0.0), None).unwrap() < 1e-9);
        // (z+1)/(2*(z-0.5)) at 0.5: chart 1/f = 2(z-1/2)/(z+1), derivative 2/(3/2)
        let f = HoloExpr::parse("(z+1)/(2*(z-0.5))").unwrap();
        let s = f.spherical_derivative(cx(0.5, 0.0), None).unwrap();
        assert!((s - 2.0 * 4.0 / 3.0).abs() < 1e-8, "{s}");
    }
}
