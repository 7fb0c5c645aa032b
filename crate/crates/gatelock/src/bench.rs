//! `.bench` netlist text format.
//!
//! Line-oriented: `INPUT(x)`, `OUTPUT(y)`, `z = GATE(a, b, ...)` and `#`
//! comments to end of line. Gate keywords are case-insensitive, signal names
//! are case-sensitive. Writing is deterministic: inputs, outputs, then gates
//! in topological order with ties broken by name, so parse(write(n)) is the
//! identity up to gate numbering.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::netlist::{GateId, GateKind, Netlist};

enum Line<'a> {
    Input(&'a str),
    Output(&'a str),
    Gate {
        name: &'a str,
        kind: GateKind,
        inputs: Vec<&'a str>,
    },
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_line(raw: &str, lineno: usize) -> Result<Option<Line<'_>>> {
    let text = strip_comment(raw).trim();
    if text.is_empty() {
        return Ok(None);
    }
    let syntax = || Error::Syntax {
        line: lineno,
        text: text.to_string(),
    };

    if let Some(eq) = text.find('=') {
        let name = text[..eq].trim();
        let rhs = text[eq + 1..].trim();
        let open = rhs.find('(').ok_or_else(syntax)?;
        if !rhs.ends_with(')') || name.is_empty() {
            return Err(syntax());
        }
        let kw = rhs[..open].trim();
        let kind = GateKind::from_keyword(kw).ok_or_else(|| Error::UnknownGateType {
            line: lineno,
            kind: kw.to_string(),
        })?;
        let args = &rhs[open + 1..rhs.len() - 1];
        let inputs: Vec<&str> = args
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        if inputs.is_empty() {
            return Err(syntax());
        }
        return Ok(Some(Line::Gate { name, kind, inputs }));
    }

    let (kw, rest) = text.split_once('(').ok_or_else(syntax)?;
    let arg = rest.strip_suffix(')').ok_or_else(syntax)?.trim();
    if arg.is_empty() || arg.contains(',') {
        return Err(syntax());
    }
    match kw.trim().to_ascii_uppercase().as_str() {
        "INPUT" => Ok(Some(Line::Input(arg))),
        "OUTPUT" => Ok(Some(Line::Output(arg))),
        other => Err(Error::UnknownGateType {
            line: lineno,
            kind: other.to_string(),
        }),
    }
}

/// Parse `.bench` text into a [`Netlist`].
pub fn parse_bench(text: &str) -> Result<Netlist> {
    let mut inputs: Vec<(&str, usize)> = Vec::new();
    let mut outputs: Vec<(&str, usize)> = Vec::new();
    let mut defs: Vec<(&str, GateKind, Vec<&str>, usize)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        match parse_line(raw, lineno)? {
            None => {}
            Some(Line::Input(name)) => inputs.push((name, lineno)),
            Some(Line::Output(name)) => outputs.push((name, lineno)),
            Some(Line::Gate { name, kind, inputs }) => defs.push((name, kind, inputs, lineno)),
        }
    }

    let mut n = Netlist::new();
    let mut def_line: HashMap<&str, usize> = HashMap::new();
    for (name, lineno) in &inputs {
        if def_line.insert(name, *lineno).is_some() {
            return Err(Error::DuplicateDefinition {
                line: *lineno,
                signal: name.to_string(),
            });
        }
        n.add_input(name)?;
    }
    // declare all gate signals first so forward references resolve
    for (name, kind, gate_inputs, lineno) in &defs {
        if def_line.insert(name, *lineno).is_some() {
            return Err(Error::DuplicateDefinition {
                line: *lineno,
                signal: name.to_string(),
            });
        }
        let (min, max) = kind.arity();
        if gate_inputs.len() < min || gate_inputs.len() > max {
            return Err(Error::Arity {
                line: *lineno,
                signal: name.to_string(),
                kind: kind.name().to_string(),
                expected: kind.arity_text(),
                got: gate_inputs.len(),
            });
        }
    }

    // declare first, wire second, so forward and DFF feedback references work
    let mut ids = Vec::with_capacity(defs.len());
    for (name, kind, _, _) in &defs {
        ids.push(n.declare_gate(name, *kind)?);
    }
    for (idx, (_, _, gate_inputs, lineno)) in defs.iter().enumerate() {
        let mut resolved = Vec::with_capacity(gate_inputs.len());
        for src in gate_inputs {
            let id = n.lookup(src).ok_or_else(|| Error::UndefinedSignal {
                line: *lineno,
                signal: src.to_string(),
            })?;
            resolved.push(id);
        }
        n.wire_gate(ids[idx], resolved);
    }

    for (name, lineno) in &outputs {
        let id = n.lookup(name).ok_or_else(|| Error::UndefinedSignal {
            line: *lineno,
            signal: name.to_string(),
        })?;
        n.mark_output(id);
    }

    // cycle check with a named offender
    n.topo_order()?;
    Ok(n)
}

pub fn parse_bench_file(path: impl AsRef<Path>) -> Result<Netlist> {
    let text = std::fs::read_to_string(path)?;
    parse_bench(&text)
}

/// Serialize a netlist to `.bench` text.
pub fn write_bench(n: &Netlist) -> String {
    let mut out = String::new();
    for &pi in n.primary_inputs() {
        writeln!(out, "INPUT({})", n.name(pi)).unwrap();
    }
    for &po in n.primary_outputs() {
        writeln!(out, "OUTPUT({})", n.name(po)).unwrap();
    }
    if !n.primary_inputs().is_empty() || !n.primary_outputs().is_empty() {
        out.push('\n');
    }
    for id in topo_by_name(n) {
        let g = n.gate(id);
        if g.kind == GateKind::Input {
            continue;
        }
        let args: Vec<&str> = g.inputs.iter().map(|&i| n.name(i)).collect();
        writeln!(out, "{} = {}({})", g.name, g.kind.name(), args.join(", ")).unwrap();
    }
    out
}

pub fn write_bench_file(n: &Netlist, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, write_bench(n))?)
}

/// Topological order with ties broken by gate name.
fn topo_by_name(n: &Netlist) -> Vec<GateId> {
    let count = n.len();
    let mut indegree = vec![0u32; count];
    for id in n.ids() {
        let g = n.gate(id);
        if matches!(g.kind, GateKind::Input | GateKind::Dff) {
            continue;
        }
        indegree[id.index()] = g.inputs.len() as u32;
    }
    let mut ready: Vec<GateId> = n.ids().filter(|id| indegree[id.index()] == 0).collect();
    let mut order = Vec::with_capacity(count);
    while !ready.is_empty() {
        let (pos, _) = ready
            .iter()
            .enumerate()
            .min_by_key(|(_, id)| n.name(**id))
            .expect("nonempty");
        let id = ready.swap_remove(pos);
        order.push(id);
        for &c in &n.gate(id).fanouts {
            if matches!(n.gate(c).kind, GateKind::Input | GateKind::Dff) {
                continue;
            }
            indegree[c.index()] -= 1;
            if indegree[c.index()] == 0 {
                ready.push(c);
            }
        }
    }
    debug_assert_eq!(order.len(), count, "writer requires an acyclic netlist");
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::KEY_INPUT_PREFIX;

    #[test]
    fn smallest_legal_netlist() {
        let n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = NAND(a,b)\n").unwrap();
        assert_eq!(n.len(), 3);
        assert_eq!(n.primary_inputs().len(), 2);
        assert_eq!(n.primary_outputs().len(), 1);
        assert_eq!(n.gates_of_kind(GateKind::Nand).len(), 1);
        n.validate().unwrap();
    }

    #[test]
    fn comments_whitespace_and_case() {
        let n = parse_bench(
            "# header\nINPUT( a )  # trailing\ninput(b)\nOUTPUT(y)\ny = nand( a , b )\n",
        )
        .unwrap();
        assert_eq!(n.len(), 3);
    }

    #[test]
    fn arity_violation_reported_with_line() {
        let err = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NAND(a)\n").unwrap_err();
        match err {
            Error::Arity { line, signal, .. } => {
                assert_eq!(line, 3);
                assert_eq!(signal, "y");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn duplicate_and_undefined_signals() {
        assert!(matches!(
            parse_bench("INPUT(a)\na = NOT(a)\n"),
            Err(Error::DuplicateDefinition { .. })
        ));
        assert!(matches!(
            parse_bench("INPUT(a)\ny = NOT(zz)\n"),
            Err(Error::UndefinedSignal { .. })
        ));
        assert!(matches!(
            parse_bench("OUTPUT(zz)\n"),
            Err(Error::UndefinedSignal { .. })
        ));
    }

    #[test]
    fn cycle_is_an_error() {
        let err = parse_bench("INPUT(a)\nx = AND(a, y)\ny = OR(x, a)\nOUTPUT(y)\n").unwrap_err();
        assert!(matches!(err, Error::CombinationalCycle { .. }));
    }

    #[test]
    fn forward_references_allowed() {
        let n = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(x)\nx = NOT(a)\n").unwrap();
        assert_eq!(n.len(), 3);
    }

    #[test]
    fn key_inputs_classified() {
        let n = parse_bench(
            "INPUT(a)\nINPUT(keyinput0)\nOUTPUT(y)\ny = XOR(a, keyinput0)\n",
        )
        .unwrap();
        assert_eq!(n.key_inputs().len(), 1);
        assert_eq!(n.data_inputs().len(), 1);
        assert!(n.name(n.key_inputs()[0]).starts_with(KEY_INPUT_PREFIX));
        let kg = n.lookup("y").unwrap();
        assert!(n.is_key_gate(kg));
    }

    #[test]
    fn empty_netlist_round_trips() {
        let n = Netlist::new();
        let text = write_bench(&n);
        assert!(text.is_empty());
        assert!(parse_bench(&text).unwrap().is_empty());
    }

    #[test]
    fn round_trip_preserves_ids_and_structure() {
        let src = "INPUT(b)\nINPUT(a)\nOUTPUT(s)\nOUTPUT(c)\ns = XOR(a, b)\nc = AND(a, b)\n";
        let n = parse_bench(src).unwrap();
        let text = write_bench(&n);
        let m = parse_bench(&text).unwrap();
        assert_eq!(n.len(), m.len());
        for id in n.ids() {
            let g = n.gate(id);
            let mid = m.lookup(&g.name).unwrap();
            let h = m.gate(mid);
            assert_eq!(g.kind, h.kind);
            let gi: Vec<&str> = g.inputs.iter().map(|&i| n.name(i)).collect();
            let hi: Vec<&str> = h.inputs.iter().map(|&i| m.name(i)).collect();
            assert_eq!(gi, hi);
        }
        // writer is deterministic
        assert_eq!(text, write_bench(&m));
    }

    #[test]
    fn dff_parses_and_cuts() {
        let n = parse_bench("INPUT(a)\nOUTPUT(q)\nq = DFF(d)\nd = NAND(a, q)\n").unwrap();
        assert_eq!(n.dffs().len(), 1);
        n.topo_order().unwrap();
    }
}
