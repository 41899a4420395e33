use super::{Binder, Expr, ExprKind, VACUOUS};

/// Renders an expression in the concrete syntax accepted by [`super::parse`].
/// Operands of infix operators are parenthesized unless atomic, so the output
/// never depends on precedence or associativity.
pub fn print(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, &mut out);
    out
}

fn is_atomic(e: &Expr) -> bool {
    matches!(
        e.kind(),
        ExprKind::UnivSet
            | ExprKind::UnivClass
            | ExprKind::BoolSort
            | ExprKind::BoolLit(_)
            | ExprKind::Var(_)
            | ExprKind::Pair(..)
            | ExprKind::App(..)
            | ExprKind::Proj(..)
            | ExprKind::MacroApp(..)
    )
}

fn write_operand(e: &Expr, out: &mut String) {
    if is_atomic(e) {
        write_expr(e, out);
    } else {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    }
}

fn write_infix(a: &Expr, op: &str, b: &Expr, out: &mut String) {
    write_operand(a, out);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    write_operand(b, out);
}

fn write_expr(e: &Expr, out: &mut String) {
    match e.kind() {
        ExprKind::UnivSet => out.push_str("Set"),
        ExprKind::UnivClass => out.push_str("Class"),
        ExprKind::BoolSort => out.push_str("Bool"),
        ExprKind::BoolLit(true) => out.push_str("True"),
        ExprKind::BoolLit(false) => out.push_str("False"),
        ExprKind::Var(n) => out.push_str(n),
        ExprKind::Bind(Binder::Sigma, x, a, b) if &**x == VACUOUS => write_infix(a, "*", b, out),
        ExprKind::Bind(Binder::Pi, x, a, b) if &**x == VACUOUS => write_infix(a, "->", b, out),
        ExprKind::Bind(binder, x, a, b) => {
            out.push_str(binder.keyword());
            out.push('(');
            out.push_str(x);
            out.push_str(" : ");
            write_expr(a, out);
            out.push_str(") ");
            write_expr(b, out);
        }
        ExprKind::Pair(a, b) => {
            out.push('<');
            write_expr(a, out);
            out.push_str(", ");
            write_expr(b, out);
            out.push('>');
        }
        ExprKind::Proj(i, inner) => {
            write_operand(inner, out);
            out.push('.');
            out.push_str(&i.number().to_string());
        }
        ExprKind::App(f, arg) => {
            write_operand(f, out);
            out.push('(');
            let mut cur = arg;
            while let ExprKind::Pair(first, rest) = cur.kind() {
                write_expr(first, out);
                out.push_str(", ");
                cur = rest;
            }
            write_expr(cur, out);
            out.push(')');
        }
        ExprKind::SetEq(a, b) => write_infix(a, "=", b, out),
        ExprKind::IsoEq(class, a, b) => {
            write_operand(a, out);
            out.push_str(" =[");
            write_expr(class, out);
            out.push_str("]= ");
            write_operand(b, out);
        }
        ExprKind::Not(inner) => {
            out.push('!');
            write_operand(inner, out);
        }
        ExprKind::Conn(c, a, b) => {
            // `!` binds tighter than every connective.
            let operand = |x: &Expr, out: &mut String| match x.kind() {
                ExprKind::Not(_) => write_expr(x, out),
                _ => write_operand(x, out),
            };
            operand(a, out);
            out.push(' ');
            out.push_str(c.symbol());
            out.push(' ');
            operand(b, out);
        }
        ExprKind::MacroApp(head, args) => {
            write_operand(head, out);
            out.push('[');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(a, out);
            }
            out.push(']');
        }
    }
}
