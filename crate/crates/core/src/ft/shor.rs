//! Shor-style error correction with verified cat states.
//!
//! X-type checks use a cat state `|0..0⟩ + |1..1⟩` coupled by CNOTs from the
//! cat into the data and read out in the X basis. Z-type checks use the dual
//! cat (uniform over even-weight strings) coupled by CNOTs from the data
//! into the cat and read out in the Z basis. Cats of weight four are checked
//! by one extra qubit comparing two of their qubits; a raised flag voids the
//! round. Rounds repeat until `t + 1` consecutive full syndrome strings
//! agree, up to `(t + 1)^2` rounds, and the agreed string is decoded with a
//! minimum-weight lookup table. Only preparations, CNOTs and single-qubit
//! measurements in the Z and X bases are used.

use std::sync::Arc;

use crate::code::{CssCode, Sector};
use crate::decoder::LookupDecoder;
use crate::error::{Error, Result};
use crate::ft::circuit::{Circuit, CircuitBuilder, ClassicalAction, Cond, EcSpec, GateKind, Region, Register};

/// Largest cat state supported by the single end-to-end verification check.
pub const MAX_CAT_WEIGHT: usize = 4;

#[derive(Clone, Debug)]
struct Gen {
    sector: Sector,
    support: Vec<usize>,
    cat: usize,
    verify: Option<usize>,
}

#[derive(Clone, Copy, Debug)]
enum QRef {
    Anc(usize),
    Data(usize),
}

#[derive(Clone, Debug)]
enum TOp {
    Gate(GateKind, Vec<QRef>),
    /// Cat readout for generator `g`.
    CatMeas(GateKind, usize, usize),
    FlagMeas(GateKind, usize),
}

/// Per-round layer template shared by every block using the same code.
#[derive(Clone, Debug)]
pub struct ShorTemplate {
    gens: Vec<Gen>,
    pub ancillas: usize,
    prep: Vec<TOp>,
    fan: Vec<Vec<TOp>>,
    verify: Vec<Vec<TOp>>,
    flag_meas: Vec<TOp>,
    couple: Vec<Vec<TOp>>,
    readout: Vec<TOp>,
}

fn schedule(ops: Vec<(usize, QRef, QRef)>) -> Vec<Vec<TOp>> {
    // Greedy packing: each data position appears at most once per layer.
    let mut layers: Vec<(Vec<usize>, Vec<TOp>)> = Vec::new();
    for (pos, a, b) in ops {
        match layers.iter_mut().find(|(used, _)| !used.contains(&pos)) {
            Some((used, l)) => {
                used.push(pos);
                l.push(TOp::Gate(GateKind::Cnot, vec![a, b]));
            }
            None => layers.push((vec![pos], vec![TOp::Gate(GateKind::Cnot, vec![a, b])])),
        }
    }
    layers.into_iter().map(|(_, l)| l).collect()
}

impl ShorTemplate {
    pub fn new(code: &CssCode) -> Result<Self> {
        let mut gens = Vec::new();
        let mut next = 0;
        for i in 0..code.num_generators() {
            let (sector, _) = code.generator_kind(i);
            let support = code.generator_support(i);
            let w = support.len();
            if w > MAX_CAT_WEIGHT {
                return Err(Error::AncillaBudget {
                    weight: w,
                    budget: MAX_CAT_WEIGHT,
                });
            }
            let cat = next;
            next += w;
            let verify = (w >= 4).then(|| {
                next += 1;
                next - 1
            });
            gens.push(Gen {
                sector,
                support,
                cat,
                verify,
            });
        }
        let wmax = gens.iter().map(|g| g.support.len()).max().unwrap_or(0);

        let mut prep = Vec::new();
        for g in &gens {
            let w = g.support.len();
            for k in 0..w {
                let plus = match g.sector {
                    Sector::X => k == 0,
                    Sector::Z => k + 1 < w,
                };
                let kind = if plus { GateKind::PrepX } else { GateKind::PrepZ };
                prep.push(TOp::Gate(kind, vec![QRef::Anc(g.cat + k)]));
            }
            if let Some(v) = g.verify {
                let kind = match g.sector {
                    Sector::X => GateKind::PrepZ,
                    Sector::Z => GateKind::PrepX,
                };
                prep.push(TOp::Gate(kind, vec![QRef::Anc(v)]));
            }
        }

        let mut fan = vec![Vec::new(); wmax.saturating_sub(1)];
        for g in &gens {
            let w = g.support.len();
            for k in 1..w {
                let (c, t) = match g.sector {
                    Sector::X => (g.cat, g.cat + k),
                    Sector::Z => (g.cat + k - 1, g.cat + w - 1),
                };
                fan[k - 1].push(TOp::Gate(GateKind::Cnot, vec![QRef::Anc(c), QRef::Anc(t)]));
            }
        }

        let mut verify = Vec::new();
        let mut flag_meas = Vec::new();
        if gens.iter().any(|g| g.verify.is_some()) {
            verify = vec![Vec::new(), Vec::new()];
            for (gi, g) in gens.iter().enumerate() {
                let Some(v) = g.verify else { continue };
                // A mid-fan-out X fault on the GHZ root spreads to a suffix
                // plus the root, which the first pair always sees. Z faults on
                // the dual cat's collector spread to a suffix, seen by the ends.
                let ends = match g.sector {
                    Sector::X => [g.cat, g.cat + 1],
                    Sector::Z => [g.cat, g.cat + g.support.len() - 1],
                };
                for (l, &e) in ends.iter().enumerate() {
                    let op = match g.sector {
                        Sector::X => vec![QRef::Anc(e), QRef::Anc(v)],
                        Sector::Z => vec![QRef::Anc(v), QRef::Anc(e)],
                    };
                    verify[l].push(TOp::Gate(GateKind::Cnot, op));
                }
                let kind = match g.sector {
                    Sector::X => GateKind::MeasZ,
                    Sector::Z => GateKind::MeasX,
                };
                flag_meas.push(TOp::FlagMeas(kind, gi));
            }
        }

        let mut z_ops = Vec::new();
        let mut x_ops = Vec::new();
        for g in &gens {
            for (k, &q) in g.support.iter().enumerate() {
                match g.sector {
                    Sector::Z => z_ops.push((q, QRef::Data(q), QRef::Anc(g.cat + k))),
                    Sector::X => x_ops.push((q, QRef::Anc(g.cat + k), QRef::Data(q))),
                }
            }
        }
        let mut couple = schedule(z_ops);
        couple.extend(schedule(x_ops));

        let mut readout = Vec::new();
        for (gi, g) in gens.iter().enumerate() {
            let kind = match g.sector {
                Sector::X => GateKind::MeasX,
                Sector::Z => GateKind::MeasZ,
            };
            for k in 0..g.support.len() {
                readout.push(TOp::CatMeas(kind, gi, g.cat + k));
            }
        }

        Ok(Self {
            gens,
            ancillas: next,
            prep,
            fan,
            verify,
            flag_meas,
            couple,
            readout,
        })
    }

    /// Layers in one round.
    pub fn round_depth(&self) -> usize {
        2 + self.fan.len() + self.verify.len() + (!self.flag_meas.is_empty()) as usize + self.couple.len()
    }
}

/// Where one gadget's qubits live.
#[derive(Clone, Debug)]
pub struct EcPlacement {
    pub data: Vec<usize>,
    pub ancilla_base: usize,
}

struct Emitter<'a> {
    tpl: &'a ShorTemplate,
    place: &'a EcPlacement,
    ec: usize,
}

impl Emitter<'_> {
    fn q(&self, r: QRef) -> usize {
        match r {
            QRef::Anc(a) => self.place.ancilla_base + a,
            QRef::Data(p) => self.place.data[p],
        }
    }

    fn emit(
        &self,
        b: &mut CircuitBuilder,
        ops: &[TOp],
        cond: &Cond,
        cat_meas: &mut [Vec<usize>],
        flags: &mut Vec<usize>,
    ) {
        let region = Region::Ec(self.ec);
        for op in ops {
            match op {
                TOp::Gate(kind, qs) => {
                    let qs: Vec<usize> = qs.iter().map(|&r| self.q(r)).collect();
                    b.add(*kind, &qs, cond.clone(), region);
                }
                TOp::CatMeas(kind, g, a) => {
                    let (_, m) = b.add(*kind, &[self.q(QRef::Anc(*a))], cond.clone(), region);
                    cat_meas[*g].push(m.expect("measurement"));
                }
                TOp::FlagMeas(kind, g) => {
                    let v = self.tpl.gens[*g].verify.expect("verified generator");
                    let (_, m) = b.add(*kind, &[self.q(QRef::Anc(v))], cond.clone(), region);
                    flags.push(m.expect("measurement"));
                }
            }
        }
    }
}

/// Appends error correction on several blocks in parallel; returns the
/// gadget ids.
pub fn append_parallel_ec(
    b: &mut CircuitBuilder,
    code: &Arc<CssCode>,
    decoder: &Arc<LookupDecoder>,
    tpl: &ShorTemplate,
    t: usize,
    places: &[EcPlacement],
) -> Vec<usize> {
    let max_rounds = (t + 1) * (t + 1);
    let ids: Vec<usize> = (0..places.len()).map(|i| b.next_ec_id() + i).collect();
    for (p, &ec) in places.iter().zip(&ids) {
        b.set_idle_region(&p.data, Region::Ec(ec));
        let anc: Vec<usize> = (p.ancilla_base..p.ancilla_base + tpl.ancillas).collect();
        b.set_idle_region(&anc, Region::Ec(ec));
    }
    let emitters: Vec<Emitter> = places
        .iter()
        .zip(&ids)
        .map(|(place, &ec)| Emitter { tpl, place, ec })
        .collect();
    let mut round_starts = Vec::new();
    for round in 0..max_rounds {
        round_starts.push(b.current_layer());
        let mut cat_meas: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); tpl.gens.len()]; places.len()];
        let mut flags: Vec<Vec<usize>> = vec![Vec::new(); places.len()];
        let layer = |b: &mut CircuitBuilder,
                     ops: &[TOp],
                     coupling: bool,
                     cat_meas: &mut Vec<Vec<Vec<usize>>>,
                     flags: &mut Vec<Vec<usize>>| {
            for (i, e) in emitters.iter().enumerate() {
                let cond = if coupling {
                    Cond::EcCoupling { ec: e.ec, round }
                } else {
                    Cond::EcRunning(e.ec)
                };
                e.emit(b, ops, &cond, &mut cat_meas[i], &mut flags[i]);
            }
        };
        b.begin_layer();
        layer(b, &tpl.prep, false, &mut cat_meas, &mut flags);
        b.end_layer();
        for ops in tpl.fan.iter().chain(&tpl.verify) {
            b.begin_layer();
            layer(b, ops, false, &mut cat_meas, &mut flags);
            b.end_layer();
        }
        if !tpl.flag_meas.is_empty() {
            b.begin_layer();
            layer(b, &tpl.flag_meas, false, &mut cat_meas, &mut flags);
            for (i, e) in emitters.iter().enumerate() {
                b.add_classical(
                    ClassicalAction::FlagCheck {
                        ec: e.ec,
                        round,
                        flags: flags[i].clone(),
                    },
                    Region::Ec(e.ec),
                );
            }
            b.end_layer();
        }
        for ops in &tpl.couple {
            b.begin_layer();
            layer(b, ops, true, &mut cat_meas, &mut flags);
            b.end_layer();
        }
        b.begin_layer();
        layer(b, &tpl.readout, false, &mut cat_meas, &mut flags);
        for (i, e) in emitters.iter().enumerate() {
            b.add_classical(
                ClassicalAction::Agree {
                    ec: e.ec,
                    round,
                    parities: cat_meas[i].clone(),
                },
                Region::Ec(e.ec),
            );
            if round + 1 == max_rounds {
                b.add_classical(ClassicalAction::Decode { ec: e.ec }, Region::Ec(e.ec));
            }
        }
        b.end_layer();
    }
    for x in [true, false] {
        b.begin_layer();
        for e in &emitters {
            let kind = if x { GateKind::X } else { GateKind::Z };
            for (pos, &q) in e.place.data.iter().enumerate() {
                b.add(kind, &[q], Cond::EcCorrection { ec: e.ec, pos, x }, Region::Ec(e.ec));
            }
        }
        b.end_layer();
    }
    let end_layer = b.current_layer();
    for (p, &ec) in places.iter().zip(&ids) {
        let id = b.push_ec(EcSpec {
            code: code.clone(),
            decoder: decoder.clone(),
            data: p.data.clone(),
            t,
            max_rounds,
            round_starts: round_starts.clone(),
            end_layer,
        });
        debug_assert_eq!(id, ec);
    }
    ids
}

/// Qubit layout for `blocks` code blocks, each followed by its ancillas.
pub fn block_layout(n: usize, ancillas: usize, blocks: usize) -> (usize, Vec<EcPlacement>, Vec<Register>) {
    let stride = n + ancillas;
    let mut places = Vec::new();
    let mut regs = Vec::new();
    for b in 0..blocks {
        let base = b * stride;
        places.push(EcPlacement {
            data: (base..base + n).collect(),
            ancilla_base: base + n,
        });
        regs.push(Register {
            name: format!("data{b}"),
            qubits: (base..base + n).collect(),
        });
        regs.push(Register {
            name: format!("ancilla{b}"),
            qubits: (base + n..base + stride).collect(),
        });
    }
    (blocks * stride, places, regs)
}

/// Stand-alone error-correction gadget on one block.
pub fn build_shor_ec(code: &CssCode, t: usize) -> Result<Circuit> {
    let tpl = ShorTemplate::new(code)?;
    let code = Arc::new(code.clone());
    let decoder = Arc::new(LookupDecoder::for_code(&code)?);
    let (nq, places, regs) = block_layout(code.n(), tpl.ancillas, 1);
    let mut b = CircuitBuilder::new(nq, regs, vec![places[0].data.clone()]);
    append_parallel_ec(&mut b, &code, &decoder, &tpl, t, &places);
    b.finish(vec![places[0].data.clone()])
}
