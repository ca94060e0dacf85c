//! Parsing, differentiating and evaluating expressions in z and z̄.

use virtual_residue::expr::{parse, Expr, Tape};
use virtual_residue::Complex64;

fn main() {
    let f = parse("z1^2*conj(z2) + exp(z1*z2)/(1 + z2)", 2).unwrap();
    let z = [Complex64::new(0.3, 0.2), Complex64::new(-0.5, 0.1)];
    println!("f = {f}");
    println!("holomorphic: {}", f.is_holomorphic());
    println!("f(z) = {:.8}", f.eval(&z).unwrap());
    let (dz, dzb) = (f.d_z(0), f.d_zbar(1));
    println!("df/dz1 = {dz}");
    println!("df/dz2bar = {dzb}");
    let tape = Tape::compile(&[f.clone(), dz, dzb]);
    let values: Vec<String> = tape.eval_vec(&z).unwrap().iter().map(|v| format!("{v:.6}")).collect();
    println!("tape: {} ops, values [{}]", tape.op_count(), values.join(", "));
    let g = parse("(1 + z1)^3", 1).unwrap();
    for (a, c) in g.polynomial_coefficients(1).unwrap() {
        println!("coefficient of z^{a:?} in {g}: {}", c.re);
    }
    println!("{}", Expr::z(0).mul(&Expr::zb(0)));
}
