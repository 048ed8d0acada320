//! Simplifying node constructors used by the differentiator.
//!
//! The rules are local and conservative: fold numeric constants, drop
//! additive zeros and multiplicative ones, and move constant factors to the
//! front of products so printed derivatives read like `2*k*z`.

use num_complex::Complex64;

use super::Node;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn konst(n: &Node) -> Option<Complex64> {
    match n {
        Node::Const(c) => Some(*c),
        _ => None,
    }
}

pub(crate) fn c(v: Complex64) -> Node {
    Node::Const(v)
}

pub(crate) fn real(v: f64) -> Node {
    Node::Const(Complex64::new(v, 0.0))
}

/// Negation as written by the parser: literals absorb the sign.
pub(crate) fn neg_literal(n: Node) -> Node {
    match n {
        Node::Const(v) => Node::Const(-v),
        other => Node::Neg(Box::new(other)),
    }
}

pub(crate) fn neg(n: Node) -> Node {
    match n {
        Node::Const(v) => Node::Const(-v),
        Node::Neg(inner) => *inner,
        other => Node::Neg(Box::new(other)),
    }
}

pub(crate) fn add(a: Node, b: Node) -> Node {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => return c(x + y),
        (Some(x), _) if x == ZERO => return b,
        (_, Some(y)) if y == ZERO => return a,
        _ => {}
    }
    match b {
        Node::Neg(inner) => sub(a, *inner),
        b => match a {
            Node::Neg(inner) => sub(b, *inner),
            a => Node::Add(Box::new(a), Box::new(b)),
        },
    }
}

pub(crate) fn sub(a: Node, b: Node) -> Node {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => return c(x - y),
        (Some(x), _) if x == ZERO => return neg(b),
        (_, Some(y)) if y == ZERO => return a,
        _ => {}
    }
    match b {
        Node::Neg(inner) => add(a, *inner),
        b => Node::Sub(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mul(a: Node, b: Node) -> Node {
    // signs float outward
    if let Node::Neg(x) = a {
        return neg(mul(*x, b));
    }
    if let Node::Neg(y) = b {
        return neg(mul(a, *y));
    }
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => return c(x * y),
        (Some(x), _) | (_, Some(x)) if x == ZERO => return c(ZERO),
        (Some(x), _) if x == ONE => return b,
        (_, Some(y)) if y == ONE => return a,
        (Some(x), _) if x == -ONE => return neg(b),
        (_, Some(y)) if y == -ONE => return neg(a),
        (None, Some(_)) => return mul(b, a),
        _ => {}
    }
    // constant in front, merged with a leading constant of the right factor
    if let Some(x) = konst(&a) {
        if let Node::Mul(ref l, ref r) = b {
            if let Some(y) = konst(l) {
                return mul(c(x * y), (**r).clone());
            }
        }
    } else if let Node::Mul(l, r) = &b {
        if let Some(y) = konst(l) {
            return mul(c(y), mul(a, (**r).clone()));
        }
    }
    // a * (1/b) = a/b
    if let Node::Div(num, den) = &b {
        if konst(num) == Some(ONE) {
            return div(a, (**den).clone());
        }
    }
    Node::Mul(Box::new(a), Box::new(b))
}

pub(crate) fn div(a: Node, b: Node) -> Node {
    if let Node::Neg(x) = a {
        return neg(div(*x, b));
    }
    if let Node::Neg(y) = b {
        return neg(div(a, *y));
    }
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) if y != ZERO => return c(x / y),
        (Some(x), _) if x == ZERO => return c(ZERO),
        (_, Some(y)) if y == ONE => return a,
        _ => {}
    }
    Node::Div(Box::new(a), Box::new(b))
}

pub(crate) fn pow(a: Node, n: i32) -> Node {
    match n {
        0 => real(1.0),
        1 => a,
        _ => match a {
            Node::Const(v) => c(v.powi(n)),
            other => Node::Pow(Box::new(other), n),
        },
    }
}
