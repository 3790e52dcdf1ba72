//! Line-oriented text format for CRNs.
//!
//! ```text
//! # comment
//! inputs: X1 X2
//! output: Y
//! leader: L
//! X1 + X2 -> Y
//! K + Y -> 0
//! 2 X -> X + Y1
//! ```

use super::{valid_species_name, Crn, CrnBuilder, CrnError, SpeciesKind};

pub(super) fn print_crn(crn: &Crn) -> String {
    let mut out = String::new();
    out.push_str("inputs:");
    for n in crn.input_names() {
        out.push(' ');
        out.push_str(n);
    }
    out.push('\n');
    out.push_str(&format!("output: {}\n", crn.output_name()));
    if let Some(l) = crn.leader_name() {
        out.push_str(&format!("leader: {l}\n"));
    }
    for r in crn.reactions() {
        out.push_str(&crn.format_reaction(r));
        out.push('\n');
    }
    out
}

/// Parse the text format. Headers may appear anywhere but must precede
/// use only in the sense that roles are fixed once the whole file is read.
pub fn parse_crn(src: &str) -> Result<Crn, CrnError> {
    let mut b = CrnBuilder::default();
    let mut saw_output = false;
    let perr = |line: usize, message: String| CrnError::Parse { line, message };

    for (lineno, raw) in src.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, rest)) = header(line) {
            let names: Vec<&str> = rest.split_whitespace().collect();
            match key {
                "inputs" => {
                    for (i, n) in names.iter().enumerate() {
                        b.declare(n, SpeciesKind::Input(i))
                            .map_err(|e| perr(line_no, e.to_string()))?;
                    }
                }
                "output" | "leader" => {
                    let [name] = names.as_slice() else {
                        return Err(perr(line_no, format!("`{key}:` takes exactly one species")));
                    };
                    let kind = if key == "output" {
                        if saw_output {
                            return Err(perr(line_no, "duplicate `output:` header".into()));
                        }
                        saw_output = true;
                        SpeciesKind::Output
                    } else {
                        SpeciesKind::Leader
                    };
                    b.declare(name, kind).map_err(|e| perr(line_no, e.to_string()))?;
                }
                _ => unreachable!(),
            }
            continue;
        }
        let Some((lhs, rhs)) = line.split_once("->") else {
            return Err(perr(
                line_no,
                format!("expected a header or reaction, got `{line}`"),
            ));
        };
        let reactants = parse_side(lhs).map_err(|m| perr(line_no, m))?;
        let products = parse_side(rhs).map_err(|m| perr(line_no, m))?;
        b.add_named(&reactants, &products)
            .map_err(|e| perr(line_no, e.to_string()))?;
    }
    if !saw_output {
        return Err(perr(0, "missing `output:` header".into()));
    }
    b.build()
}

fn header(line: &str) -> Option<(&str, &str)> {
    let (key, rest) = line.split_once(':')?;
    let key = key.trim();
    if matches!(key, "inputs" | "output" | "leader") && !rest.starts_with(':') {
        Some((key, rest))
    } else {
        None
    }
}

fn parse_side(side: &str) -> Result<Vec<(String, u64)>, String> {
    let side = side.trim();
    if side == "0" {
        return Ok(Vec::new());
    }
    side.split('+').map(parse_term).collect()
}

fn parse_term(term: &str) -> Result<(String, u64), String> {
    let term = term.trim();
    let digits = term.chars().take_while(|c| c.is_ascii_digit()).count();
    let (coeff, name) = term.split_at(digits);
    let name = name.trim();
    let coeff = if coeff.is_empty() {
        1
    } else {
        coeff
            .parse::<u64>()
            .map_err(|e| format!("bad coefficient in `{term}`: {e}"))?
    };
    if !valid_species_name(name) {
        return Err(format!("bad species term `{term}`"));
    }
    Ok((name.to_string(), coeff))
}
