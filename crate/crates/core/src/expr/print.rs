//! Printing of normal forms in the same grammar the parser accepts.

use super::{Expr, Node};
use num_complex::Complex64;
use std::fmt;

fn real(x: f64) -> String {
    format!("{}", x + 0.0)
}

/// Formats a complex constant as a single parseable token group.
pub(crate) fn complex(c: Complex64) -> String {
    if c.im == 0.0 {
        return real(c.re);
    }
    let im = match c.im.abs() {
        x if x == 1.0 => "i".to_string(),
        x => format!("{}i", real(x)),
    };
    if c.re == 0.0 {
        if c.im < 0.0 {
            format!("-{im}")
        } else {
            im
        }
    } else {
        let sign = if c.im < 0.0 { '-' } else { '+' };
        format!("({}{}{})", real(c.re), sign, im)
    }
}

/// True when the printed constant starts with a minus sign, so a leading
/// minus can be moved into the surrounding sum.
fn is_negative_lead(c: Complex64) -> bool {
    complex(c).starts_with('-')
}

fn write_atom(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Sum(_) | Node::Product(..) => write!(f, "({e})"),
        Node::Const(c) if c.re < 0.0 || c.im != 0.0 => write!(f, "({})", complex(*c)),
        _ => write!(f, "{e}"),
    }
}

fn write_product(f: &mut fmt::Formatter<'_>, c: Complex64, fs: &[(Expr, i32)]) -> fmt::Result {
    if c == Complex64::new(-1.0, 0.0) {
        write!(f, "-")?;
    } else if c != Complex64::new(1.0, 0.0) {
        write!(f, "{}*", complex(c))?;
    }
    for (i, (a, k)) in fs.iter().enumerate() {
        if i > 0 {
            write!(f, "*")?;
        }
        write_atom(f, a)?;
        if *k != 1 {
            write!(f, "^{k}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{}", complex(*c)),
            Node::Var(v) => {
                let p = if v.conj { "zb" } else { "z" };
                write!(f, "{p}{}", v.index + 1)
            }
            Node::Exp(e) => write!(f, "exp({e})"),
            Node::Product(c, fs) => write_product(f, *c, fs),
            Node::Sum(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    let (c, fs) = t.split_term();
                    if i > 0 {
                        if is_negative_lead(c) {
                            write!(f, " - ")?;
                            if fs.is_empty() {
                                write!(f, "{}", complex(-c))?;
                            } else {
                                write_product(f, -c, &fs)?;
                            }
                            continue;
                        }
                        write!(f, " + ")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
        }
    }
}
