use super::{input_name, reaction};
use crate::crn::{Crn, CrnBuilder, CrnError, NamedReaction, SpeciesKind};

/// A reaction fragment with a named interface. Unlike a [`Crn`] it may have
/// several outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    pub reactions: Vec<NamedReaction>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub leader: Option<String>,
}

impl Gadget {
    pub fn from_crn(crn: &Crn) -> Gadget {
        Gadget {
            reactions: crn.named_reactions(),
            inputs: crn.input_names().iter().map(|s| s.to_string()).collect(),
            outputs: vec![crn.output_name().to_string()],
            leader: crn.leader_name().map(str::to_string),
        }
    }

    /// View as a CRN with `outputs[output]` as the output species.
    pub fn as_crn(&self, output: usize) -> Result<Crn, CrnError> {
        let mut b = CrnBuilder::default();
        for (i, n) in self.inputs.iter().enumerate() {
            b.declare(n, SpeciesKind::Input(i))?;
        }
        b.declare(&self.outputs[output], SpeciesKind::Output)?;
        if let Some(l) = &self.leader {
            b.declare(l, SpeciesKind::Leader)?;
        }
        for r in &self.reactions {
            b.add_reaction(r)?;
        }
        b.build()
    }
}

/// `X1 + ... + Xk → Y`.
pub fn compile_min(k: usize) -> Crn {
    assert!(k >= 1, "min of zero inputs");
    let inputs: Vec<String> = (1..=k).map(|i| format!("X{i}")).collect();
    let names: Vec<&str> = inputs.iter().map(String::as_str).collect();
    let reactants: Vec<(&str, u64)> = names.iter().map(|&n| (n, 1)).collect();
    Crn::builder()
        .inputs(&names)
        .output("Y")
        .reaction(&reactants, &[("Y", 1)])
        .build()
        .expect("min gadget is well-formed")
}

/// `c(a, b, x) = a + 1{x(axis) > j}·b` over inputs `A, B, X1..Xd`.
pub fn compile_indicator(axis: usize, j: u64, d: usize) -> Crn {
    assert!(axis < d, "axis out of range");
    let xs: Vec<String> = (0..d).map(|i| input_name(i, d)).collect();
    let mut names: Vec<&str> = vec!["A", "B"];
    names.extend(xs.iter().map(String::as_str));
    let x = xs[axis].as_str();
    Crn::builder()
        .inputs(&names)
        .output("Y")
        .reaction(&[("A", 1)], &[("Y", 1)])
        .reaction(&[(x, j + 1), ("B", 1)], &[(x, j + 1), ("Y", 1)])
        .build()
        .expect("indicator gadget is well-formed")
}

/// `(n_i + 1)X_i → n_i X_i + Y_i` per axis, computing `(x − n)₊`.
pub fn compile_truncate(floor: &[u64]) -> Gadget {
    let d = floor.len();
    let inputs: Vec<String> = (0..d).map(|i| input_name(i, d)).collect();
    let outputs: Vec<String> = (1..=d).map(|i| format!("Y{i}")).collect();
    let reactions = floor
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            reaction(
                &[(inputs[i].as_str(), n + 1)],
                &[(inputs[i].as_str(), n), (outputs[i].as_str(), 1)],
            )
        })
        .collect();
    Gadget {
        reactions,
        inputs,
        outputs,
        leader: None,
    }
}

/// `X_i → X_i^1 + ... + X_i^m` per axis. Outputs are ordered copy-major:
/// all axes of copy 1, then copy 2, and so on.
pub fn compile_fanout(m: usize, d: usize) -> Gadget {
    assert!(m >= 1, "fan-out to zero copies");
    let inputs: Vec<String> = (0..d).map(|i| input_name(i, d)).collect();
    let copy = |i: usize, k: usize| format!("{}^{k}", inputs[i]);
    let outputs = (1..=m)
        .flat_map(|k| (0..d).map(move |i| (i, k)))
        .map(|(i, k)| copy(i, k))
        .collect();
    let reactions = (0..d)
        .map(|i| {
            let copies: Vec<String> = (1..=m).map(|k| copy(i, k)).collect();
            let products: Vec<(&str, u64)> = copies.iter().map(|c| (c.as_str(), 1)).collect();
            reaction(&[(inputs[i].as_str(), 1)], &products)
        })
        .collect();
    Gadget {
        reactions,
        inputs,
        outputs,
        leader: None,
    }
}
