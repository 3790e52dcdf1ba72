use std::collections::HashMap;

use super::gadgets::{compile_fanout, compile_indicator, compile_min, compile_truncate, Gadget};
use super::{compile_quilt, input_name, CompileError};
use crate::crn::{Crn, CrnBuilder, CrnError, NamedReaction, SpeciesKind, NAMESPACE_SEP};
use crate::funcspec::ObliviousSpec;

/// A gadget placed in a netlist, with its interface in netlist names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetInstance {
    pub kind: &'static str,
    pub namespace: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub leader: Option<String>,
}

/// Gadgets wired together by species names. Each placement renames the
/// gadget's species into its own namespace except for bound interface
/// species, which take the wire name they are bound to.
#[derive(Debug, Default, Clone)]
pub struct Netlist {
    reactions: Vec<NamedReaction>,
    instances: Vec<GadgetInstance>,
}

impl Netlist {
    pub fn new() -> Self {
        Netlist::default()
    }

    pub fn instances(&self) -> &[GadgetInstance] {
        &self.instances
    }

    pub fn place(
        &mut self,
        kind: &'static str,
        gadget: &Gadget,
        namespace: &str,
        bind: &[(&str, &str)],
    ) -> &GadgetInstance {
        let bind: HashMap<&str, &str> = bind.iter().copied().collect();
        let rename = |s: &str| -> String {
            match bind.get(s) {
                Some(w) => w.to_string(),
                None => format!("{namespace}{NAMESPACE_SEP}{s}"),
            }
        };
        for r in &gadget.reactions {
            let map = |t: &[(String, u64)]| t.iter().map(|(s, k)| (rename(s), *k)).collect();
            self.reactions.push(NamedReaction {
                reactants: map(&r.reactants),
                products: map(&r.products),
            });
        }
        self.instances.push(GadgetInstance {
            kind,
            namespace: namespace.to_string(),
            inputs: gadget.inputs.iter().map(|s| rename(s)).collect(),
            outputs: gadget.outputs.iter().map(|s| rename(s)).collect(),
            leader: gadget.leader.as_deref().map(rename),
        });
        self.instances.last().expect("just pushed")
    }

    /// Close the netlist into a CRN. Local leaders are fed from one root
    /// leader `L` through a binary cascade; a single local leader is
    /// identified with `L` directly.
    pub fn finish(self, inputs: &[String], output: &str) -> Result<Crn, CrnError> {
        let leaders: Vec<String> = self.instances.iter().filter_map(|g| g.leader.clone()).collect();
        let mut reactions = self.reactions;
        let mut b = CrnBuilder::default();
        for (i, n) in inputs.iter().enumerate() {
            b.declare(n, SpeciesKind::Input(i))?;
        }
        b.declare(output, SpeciesKind::Output)?;
        if !leaders.is_empty() {
            b.declare("L", SpeciesKind::Leader)?;
        }
        match leaders.as_slice() {
            [] => {}
            [only] => {
                let swap = |t: &mut Vec<(String, u64)>| {
                    for (s, _) in t.iter_mut() {
                        if s == only {
                            *s = "L".to_string();
                        }
                    }
                };
                for r in &mut reactions {
                    swap(&mut r.reactants);
                    swap(&mut r.products);
                }
            }
            many => {
                let split = |k: usize| format!("split{NAMESPACE_SEP}{k}");
                let mut holder = "L".to_string();
                for (k, l) in many[..many.len() - 2].iter().enumerate() {
                    let next = split(k + 1);
                    b.add_named(&[(holder, 1)], &[(l.clone(), 1), (next.clone(), 1)])?;
                    holder = next;
                }
                let (a, z) = (&many[many.len() - 2], &many[many.len() - 1]);
                b.add_named(&[(holder, 1)], &[(a.clone(), 1), (z.clone(), 1)])?;
            }
        }
        for r in &reactions {
            b.add_reaction(r)?;
        }
        b.build()
    }
}

fn child(ns: &str, name: &str) -> String {
    if ns.is_empty() {
        name.to_string()
    } else {
        format!("{ns}.{name}")
    }
}

fn wire(ns: &str, name: &str) -> String {
    format!("{ns}{NAMESPACE_SEP}{name}")
}

/// Assemble the CRN for a spec from the min decomposition
/// `f(x) = min[f(x∨n), f_{x(i)→j}(x) + 1{x(i)>j}·f(x∨n)]`.
///
/// Each term reading `f(x∨n)` gets its own truncate, quilt and min
/// pipeline; restriction terms recurse and pass through an indicator. Every
/// free input is fanned out to `1 + 2R` copies, `R` being the number of
/// restriction terms at that level. Identity stages (truncation by 0,
/// fan-out or min of one) are omitted.
pub fn compile_spec(spec: &ObliviousSpec) -> Result<Crn, CompileError> {
    spec.validate(spec.default_window(), None)
        .map_err(CompileError::Validation)?;
    let d = spec.dimension();
    let inputs: Vec<String> = (0..d).map(|i| input_name(i, d)).collect();
    let wires: Vec<Option<String>> = inputs.iter().cloned().map(Some).collect();
    let mut net = Netlist::new();
    emit_level(&mut net, spec, &wires, "Y", "")?;
    let crn = net.finish(&inputs, "Y")?;
    assert!(crn.is_output_oblivious(), "compiled network reads its output");
    Ok(crn)
}

struct Streams {
    copies: Vec<Vec<String>>,
}

impl Streams {
    fn take(&mut self, axis: usize) -> String {
        self.copies[axis].pop().expect("fan-out sized for every consumer")
    }
}

fn emit_level(
    net: &mut Netlist,
    spec: &ObliviousSpec,
    wires: &[Option<String>],
    out: &str,
    ns: &str,
) -> Result<(), CompileError> {
    let free = spec.free_axes();
    if free.is_empty() {
        let point: Vec<u64> = spec.fixed().iter().map(|v| v.unwrap_or(0)).collect();
        let c = spec.eval(&point)?;
        if c > 0 {
            let g = Gadget {
                reactions: vec![super::reaction(&[("L", 1)], &[("Y", c)])],
                inputs: vec![],
                outputs: vec!["Y".into()],
                leader: Some("L".into()),
            };
            net.place("constant", &g, &child(ns, "const"), &[("Y", out)]);
        }
        return Ok(());
    }

    let mut restrictions: Vec<_> = spec.restrictions().iter().collect();
    restrictions.sort_by_key(|r| (r.axis, r.value));
    let copies = 1 + 2 * restrictions.len();
    let mut streams = Streams {
        copies: vec![Vec::new(); spec.dimension()],
    };
    for &i in &free {
        let w = wires[i].as_deref().expect("free axes carry a wire");
        if copies == 1 {
            streams.copies[i].push(w.to_string());
        } else {
            let inst = net.place(
                "fanout",
                &compile_fanout(copies, 1),
                &child(ns, &format!("fan{}", i + 1)),
                &[("X", w)],
            );
            // popped from the back: consumers take copy 1 first
            streams.copies[i] = inst.outputs.iter().rev().cloned().collect();
        }
    }

    let main_ns = child(ns, "t0");
    let main_out = if restrictions.is_empty() {
        out.to_string()
    } else {
        wire(&main_ns, "Y")
    };
    let main_in: Vec<String> = free.iter().map(|&i| streams.take(i)).collect();
    emit_pipeline(net, spec, &main_in, &main_out, &main_ns)?;
    let mut terms = vec![main_out];

    for (t, r) in restrictions.iter().enumerate() {
        let tns = child(ns, &format!("t{}", t + 1));
        let nested_wires: Vec<Option<String>> = (0..spec.dimension())
            .map(|i| (free.contains(&i) && i != r.axis).then(|| streams.take(i)))
            .collect();
        let a = wire(&tns, "A");
        emit_level(net, &r.spec, &nested_wires, &a, &child(&tns, "s"))?;
        let b = wire(&tns, "B");
        let pipe_in: Vec<String> = free.iter().map(|&i| streams.take(i)).collect();
        emit_pipeline(net, spec, &pipe_in, &b, &child(&tns, "p"))?;
        let x = streams.take(r.axis);
        let y = wire(&tns, "Y");
        net.place(
            "indicator",
            &Gadget::from_crn(&compile_indicator(0, r.value, 1)),
            &child(&tns, "ind"),
            &[("A", &a), ("B", &b), ("X", &x), ("Y", &y)],
        );
        terms.push(y);
    }

    if terms.len() > 1 {
        let names: Vec<String> = (1..=terms.len()).map(|k| format!("X{k}")).collect();
        let mut bind: Vec<(&str, &str)> = names
            .iter()
            .map(String::as_str)
            .zip(terms.iter().map(String::as_str))
            .collect();
        bind.push(("Y", out));
        net.place(
            "min",
            &Gadget::from_crn(&compile_min(terms.len())),
            &child(ns, "min"),
            &bind,
        );
    }
    Ok(())
}

/// `f(x∨n)` from one copy of each free input: truncate by `n`, fan out to
/// the pieces, run each shifted piece, take the min.
fn emit_pipeline(
    net: &mut Netlist,
    spec: &ObliviousSpec,
    inputs: &[String],
    out: &str,
    ns: &str,
) -> Result<(), CompileError> {
    let free = spec.free_axes();
    let floor = spec.floor();
    let m = spec.pieces().len();

    let mut per_piece: Vec<Vec<String>> = vec![Vec::new(); m];
    for (pos, &i) in free.iter().enumerate() {
        let mut s = inputs[pos].clone();
        if floor[i] > 0 {
            let inst = net.place(
                "truncate",
                &compile_truncate(&[floor[i]]),
                &child(ns, &format!("trunc{}", i + 1)),
                &[("X", &s)],
            );
            s = inst.outputs[0].clone();
        }
        if m == 1 {
            per_piece[0].push(s);
        } else {
            let inst = net.place(
                "fanout",
                &compile_fanout(m, 1),
                &child(ns, &format!("fan{}", i + 1)),
                &[("X", &s)],
            );
            for (k, o) in inst.outputs.iter().enumerate() {
                per_piece[k].push(o.clone());
            }
        }
    }

    let shift: Vec<u64> = (0..spec.dimension())
        .map(|i| if spec.fixed()[i].is_some() { 0 } else { floor[i] })
        .collect();
    let mut piece_outs = Vec::with_capacity(m);
    for (k, g) in spec.pieces().iter().enumerate() {
        let h = g.shift_and_restrict(&shift, spec.fixed());
        let crn = compile_quilt(&h)?;
        let gadget = Gadget::from_crn(&crn);
        let y = if m == 1 {
            out.to_string()
        } else {
            wire(&child(ns, &format!("q{}", k + 1)), "Y")
        };
        let mut bind: Vec<(&str, &str)> = gadget
            .inputs
            .iter()
            .map(String::as_str)
            .zip(per_piece[k].iter().map(String::as_str))
            .collect();
        bind.push(("Y", &y));
        net.place("quilt", &gadget, &child(ns, &format!("q{}", k + 1)), &bind);
        piece_outs.push(y);
    }
    if m > 1 {
        let names: Vec<String> = (1..=m).map(|k| format!("X{k}")).collect();
        let mut bind: Vec<(&str, &str)> = names
            .iter()
            .map(String::as_str)
            .zip(piece_outs.iter().map(String::as_str))
            .collect();
        bind.push(("Y", out));
        net.place(
            "min",
            &Gadget::from_crn(&compile_min(m)),
            &child(ns, "min"),
            &bind,
        );
    }
    Ok(())
}
