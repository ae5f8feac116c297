/// Renders `x` rounded to 12 significant digits in its shortest decimal form.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}")
        .parse()
        .expect("scientific notation parses");
    format!("{rounded}")
}
