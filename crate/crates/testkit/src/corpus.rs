//! Reference programs with known results.

/// Addition on unary naturals; `main = plus 1 1` evaluates to 2.
pub const PLUS: &str = "\
plus Z n = n
plus (S m) n = S (plus m n)
main = plus 1 1
";

const FAC_LIB: &str = "\
plus Z n = n
plus (S m) n = S (plus m n)
mul Z n = Z
mul (S m) n = plus n (mul m n)
fac Z = S Z
fac (S n) = mul (fac n) (S n)
";

const EVEN_LIB: &str = "\
even Z = True
even (S n) = odd n
odd Z = False
odd (S n) = even n
";

const REMOVE_LIB: &str = "\
data List a = Nil | Cons a (List a)
eqNat Z Z = True
eqNat Z (S _) = False
eqNat (S _) Z = False
eqNat (S m) (S n) = eqNat m n
remove eqFunc ele (Cons hd tl) =
  if eqFunc ele hd
    then tl
    else Cons hd (remove eqFunc ele tl)
remove _ _ Nil = Nil
";

/// `main = fac n`.
pub fn fac(n: u64) -> String {
    format!("{FAC_LIB}main = fac {n}\n")
}

/// `main = even n`.
pub fn even(n: u64) -> String {
    format!("{EVEN_LIB}main = even {n}\n")
}

/// `main` removes the first `ele` from `list`.
pub fn remove(list: &[u64], ele: u64) -> String {
    format!(
        "{REMOVE_LIB}main = remove eqNat {ele} ({})\n",
        list_literal(list)
    )
}

/// The rendered result of [`remove`], computed directly.
pub fn remove_expected(list: &[u64], ele: u64) -> String {
    let mut out = list.to_vec();
    if let Some(i) = out.iter().position(|x| *x == ele) {
        out.remove(i);
    }
    render_list(&out)
}

/// `Cons 1 (Cons 2 Nil)` syntax for a list of naturals.
pub fn list_literal(list: &[u64]) -> String {
    list.iter()
        .rev()
        .fold("Nil".to_string(), |acc, x| format!("Cons {x} ({acc})"))
}

fn render_list(list: &[u64]) -> String {
    match list {
        [] => "Nil".into(),
        [x] => format!("Cons {x} Nil"),
        [x, rest @ ..] => format!("Cons {x} ({})", render_list(rest)),
    }
}
