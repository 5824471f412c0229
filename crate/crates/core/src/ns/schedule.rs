//! Slot schedules: which intermediate of a time step lives in which array.
//!
//! A schedule is a list of steps. Each step evaluates one [`Formula`],
//! reading named quantities out of slots and writing its result into a slot.
//! The validator runs the schedule symbolically and reports every read of a
//! quantity that is not where the step expects it.

use std::collections::BTreeMap;
use std::fmt;

use super::{Component, Mix, ScheduleMode, SchemeOrder};

/// Time level of a quantity relative to the step being taken from `t^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    /// `n-1`
    Previous,
    /// `n`
    Current,
    /// Velocity after the momentum solve, before correction.
    Tentative,
    /// `n+1`
    Next,
    /// Pressure increment of the previous step.
    LastIncrement,
    /// Right-hand side of the momentum solve.
    Rhs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quantity {
    pub comp: Component,
    pub stage: Stage,
}

impl Quantity {
    pub const fn new(comp: Component, stage: Stage) -> Self {
        Quantity { comp, stage }
    }

    /// What a slot holding `self` at entry must hold after one full step.
    pub fn advanced(self) -> Quantity {
        let stage = match (self.comp, self.stage) {
            (_, Stage::Previous) => Stage::Current,
            (_, Stage::Current) => Stage::Next,
            (Component::P, Stage::LastIncrement) => Stage::Tentative,
            (_, s) => s,
        };
        Quantity { comp: self.comp, stage }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.comp.letter();
        match (self.comp, self.stage) {
            (_, Stage::Previous) => write!(f, "{c}^(n-1)"),
            (_, Stage::Current) => write!(f, "{c}^n"),
            (Component::P, Stage::Tentative) => write!(f, "{c}~^(n+1)"),
            (_, Stage::Tentative) => write!(f, "{c}~"),
            (_, Stage::Next) => write!(f, "{c}^(n+1)"),
            (_, Stage::LastIncrement) => write!(f, "{c}~^n"),
            (_, Stage::Rhs) => write!(f, "f_{c}"),
        }
    }
}

impl fmt::Display for Mix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mix::Current => "current",
            Mix::Extrapolated => "extrapolated",
            Mix::Averaged => "averaged",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    MomentumRhs { comp: Component, order: SchemeOrder, advecting: [Mix; 3] },
    MomentumSolve { comp: Component },
    PressurePoisson,
    Correct { comp: Component },
    PressureUpdate,
    Copy,
}

impl Formula {
    /// Quantities the formula needs, independent of where they are stored.
    pub fn inputs(&self, dim: usize) -> Vec<Quantity> {
        use Stage::*;
        let q = Quantity::new;
        let vel = |a: usize| Component::velocity(a);
        match *self {
            Formula::MomentumRhs { comp, order, advecting } => {
                let mut v = Vec::new();
                for a in 0..dim {
                    let c = vel(a);
                    v.push(q(c, Current));
                    match (order, advecting[a]) {
                        (SchemeOrder::First, _) | (_, Mix::Current) => {}
                        (SchemeOrder::Second, Mix::Extrapolated) => v.push(q(c, Previous)),
                        (SchemeOrder::Second, Mix::Averaged) => v.push(q(c, Tentative)),
                    }
                }
                if order == SchemeOrder::Second && !v.contains(&q(comp, Current)) {
                    v.push(q(comp, Current));
                }
                v.push(q(Component::P, Current));
                v
            }
            Formula::MomentumSolve { comp } => vec![q(comp, Rhs), q(comp, Current)],
            Formula::PressurePoisson => {
                let mut v: Vec<_> = (0..dim).map(|a| q(vel(a), Tentative)).collect();
                v.push(q(Component::P, LastIncrement));
                v
            }
            Formula::Correct { comp } => vec![q(comp, Tentative), q(Component::P, Tentative)],
            Formula::PressureUpdate => vec![q(Component::P, Current), q(Component::P, Tentative)],
            Formula::Copy => Vec::new(),
        }
    }

    pub fn output(&self) -> Option<Quantity> {
        use Stage::*;
        let q = Quantity::new;
        match *self {
            Formula::MomentumRhs { comp, .. } => Some(q(comp, Rhs)),
            Formula::MomentumSolve { comp } => Some(q(comp, Tentative)),
            Formula::PressurePoisson => Some(q(Component::P, Tentative)),
            Formula::Correct { comp } => Some(q(comp, Next)),
            Formula::PressureUpdate => Some(q(Component::P, Next)),
            Formula::Copy => None,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::MomentumRhs { comp, order, advecting } => write!(
                f,
                "momentum rhs {} (order {}, advecting {}/{}/{})",
                comp.letter(),
                order.as_u8(),
                advecting[0],
                advecting[1],
                advecting[2]
            ),
            Formula::MomentumSolve { comp } => write!(f, "momentum solve {}", comp.letter()),
            Formula::PressurePoisson => f.write_str("pressure increment"),
            Formula::Correct { comp } => write!(f, "correct {}", comp.letter()),
            Formula::PressureUpdate => f.write_str("pressure update"),
            Formula::Copy => f.write_str("copy"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub formula: Formula,
    pub reads: Vec<(Quantity, usize)>,
    pub writes: (Quantity, usize),
}

impl Step {
    pub fn slot_of(&self, q: Quantity) -> Option<usize> {
        self.reads.iter().find(|(r, _)| *r == q).map(|&(_, s)| s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotSpec {
    pub name: String,
    pub comp: Component,
    /// Temporaries are not persistent arrays and do not count as storage.
    pub resident: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotSchedule {
    pub mode: ScheduleMode,
    pub order: SchemeOrder,
    pub dim: usize,
    pub slots: Vec<SlotSpec>,
    /// What each slot holds when a step starts.
    pub entry: Vec<(usize, Quantity)>,
    pub steps: Vec<Step>,
}

struct Builder {
    dim: usize,
    slots: Vec<SlotSpec>,
    steps: Vec<Step>,
}

impl Builder {
    fn new(dim: usize) -> Self {
        Builder { dim, slots: Vec::new(), steps: Vec::new() }
    }

    fn slot(&mut self, name: String, comp: Component, resident: bool) -> usize {
        self.slots.push(SlotSpec { name, comp, resident });
        self.slots.len() - 1
    }

    fn id(&self, name: &str) -> usize {
        self.slots.iter().position(|s| s.name == name).expect("slot declared")
    }

    fn step(&mut self, formula: Formula, reads: &[(Quantity, &str)], writes: (Quantity, &str)) {
        let reads = reads.iter().map(|&(q, s)| (q, self.id(s))).collect();
        let writes = (writes.0, self.id(writes.1));
        self.steps.push(Step { formula, reads, writes });
    }

    fn comps(&self) -> Vec<Component> {
        (0..self.dim).map(Component::velocity).collect()
    }
}

fn up(c: Component) -> char {
    c.letter().to_ascii_uppercase()
}

/// Mixture of each advecting component for the right-hand side of `comp`:
/// components already solved this step are averaged with their tentative
/// value, the rest are extrapolated.
fn second_order_mixes(comp: Component) -> [Mix; 3] {
    let c = comp.axis().expect("velocity component");
    let mut m = [Mix::Extrapolated; 3];
    for (a, mix) in m.iter_mut().enumerate() {
        if a < c {
            *mix = Mix::Averaged;
        }
    }
    m
}

impl SlotSchedule {
    pub fn new(mode: ScheduleMode, order: SchemeOrder, dim: usize) -> Self {
        match mode {
            ScheduleMode::Classical => Self::classical(order, dim, false),
            ScheduleMode::Efficient => Self::efficient(order, dim),
        }
    }

    /// Separate arrays for every time level and for the tentative fields.
    pub fn classical(order: SchemeOrder, dim: usize, extrapolate_all: bool) -> Self {
        use Stage::*;
        let q = Quantity::new;
        let p = Component::P;
        let mut b = Builder::new(dim);
        let second = order == SchemeOrder::Second;
        for c in b.comps() {
            let u = up(c);
            b.slot(format!("{u}_new"), c, true);
            b.slot(format!("{u}_old"), c, true);
            if second {
                b.slot(format!("{u}_2old"), c, true);
            }
            b.slot(format!("{u}t_new"), c, true);
        }
        for name in ["P_new", "P_old", "Pt_new"] {
            b.slot(name.into(), p, true);
        }
        for c in b.comps() {
            b.slot(format!("F_{}", c.letter()), c, false);
        }

        let mut entry = Vec::new();
        for c in b.comps() {
            let u = up(c);
            entry.push((b.id(&format!("{u}_old")), q(c, Current)));
            if second {
                entry.push((b.id(&format!("{u}_2old")), q(c, Previous)));
            }
        }
        entry.push((b.id("P_old"), q(p, Current)));
        entry.push((b.id("Pt_new"), q(p, LastIncrement)));

        let comps = b.comps();
        for (idx, &c) in comps.iter().enumerate() {
            let mut reads: Vec<(Quantity, String)> = Vec::new();
            let advecting = if !second {
                for &a in &comps {
                    reads.push((q(a, Current), format!("{}_old", up(a))));
                }
                [Mix::Current; 3]
            } else {
                let mixes = if extrapolate_all { [Mix::Extrapolated; 3] } else { second_order_mixes(c) };
                for (ai, &a) in comps.iter().enumerate() {
                    reads.push((q(a, Current), format!("{}_old", up(a))));
                    if mixes[ai] == Mix::Averaged && ai < idx {
                        reads.push((q(a, Tentative), format!("{}t_new", up(a))));
                    } else {
                        reads.push((q(a, Previous), format!("{}_2old", up(a))));
                    }
                }
                mixes
            };
            reads.push((q(p, Current), "P_old".into()));
            let f = format!("F_{}", c.letter());
            let r: Vec<(Quantity, &str)> = reads.iter().map(|(q, s)| (*q, s.as_str())).collect();
            b.step(Formula::MomentumRhs { comp: c, order, advecting }, &r, (q(c, Rhs), &f));
            let old = format!("{}_old", up(c));
            let tent = format!("{}t_new", up(c));
            b.step(
                Formula::MomentumSolve { comp: c },
                &[(q(c, Rhs), &f), (q(c, Current), &old)],
                (q(c, Tentative), &tent),
            );
        }
        let mut reads: Vec<(Quantity, String)> =
            comps.iter().map(|&c| (q(c, Tentative), format!("{}t_new", up(c)))).collect();
        reads.push((q(p, LastIncrement), "Pt_new".into()));
        let r: Vec<(Quantity, &str)> = reads.iter().map(|(q, s)| (*q, s.as_str())).collect();
        b.step(Formula::PressurePoisson, &r, (q(p, Tentative), "Pt_new"));
        for &c in &comps {
            let tent = format!("{}t_new", up(c));
            let new = format!("{}_new", up(c));
            b.step(
                Formula::Correct { comp: c },
                &[(q(c, Tentative), &tent), (q(p, Tentative), "Pt_new")],
                (q(c, Next), &new),
            );
        }
        b.step(
            Formula::PressureUpdate,
            &[(q(p, Current), "P_old"), (q(p, Tentative), "Pt_new")],
            (q(p, Next), "P_new"),
        );
        for &c in &comps {
            let u = up(c);
            if second {
                b.step(
                    Formula::Copy,
                    &[(q(c, Current), &format!("{u}_old"))],
                    (q(c, Current), &format!("{u}_2old")),
                );
            }
            b.step(Formula::Copy, &[(q(c, Next), &format!("{u}_new"))], (q(c, Next), &format!("{u}_old")));
        }
        b.step(Formula::Copy, &[(q(p, Next), "P_new")], (q(p, Next), "P_old"));

        SlotSchedule { mode: ScheduleMode::Classical, order, dim, slots: b.slots, entry, steps: b.steps }
    }

    /// Two arrays per velocity component and two for the pressure.
    pub fn efficient(order: SchemeOrder, dim: usize) -> Self {
        use Stage::*;
        let q = Quantity::new;
        let p = Component::P;
        let mut b = Builder::new(dim);
        let second = order == SchemeOrder::Second;
        for c in b.comps() {
            let u = up(c);
            b.slot(format!("{u}_new"), c, true);
            b.slot(format!("{u}_old"), c, true);
        }
        for name in ["P_new", "P_old"] {
            b.slot(name.into(), p, true);
        }
        for c in b.comps() {
            b.slot(format!("F_{}", c.letter()), c, false);
        }
        let comps = b.comps();

        let mut entry = Vec::new();
        for &c in &comps {
            let u = up(c);
            if second {
                entry.push((b.id(&format!("{u}_new")), q(c, Current)));
                entry.push((b.id(&format!("{u}_old")), q(c, Previous)));
            } else {
                entry.push((b.id(&format!("{u}_old")), q(c, Current)));
            }
        }
        entry.push((b.id("P_old"), q(p, Current)));
        entry.push((b.id("P_new"), q(p, LastIncrement)));

        // Where the current velocity lives at entry.
        let cur = |c: Component| format!("{}_{}", up(c), if second { "new" } else { "old" });
        for (idx, &c) in comps.iter().enumerate() {
            let f = format!("F_{}", c.letter());
            let mut reads: Vec<(Quantity, String)> = Vec::new();
            let advecting = if !second {
                for &a in &comps {
                    reads.push((q(a, Current), cur(a)));
                }
                [Mix::Current; 3]
            } else {
                for (ai, &a) in comps.iter().enumerate() {
                    let u = up(a);
                    if ai < idx {
                        // Already solved: u^n moved to *_old, tentative in *_new.
                        reads.push((q(a, Current), format!("{u}_old")));
                        reads.push((q(a, Tentative), format!("{u}_new")));
                    } else {
                        reads.push((q(a, Current), format!("{u}_new")));
                        reads.push((q(a, Previous), format!("{u}_old")));
                    }
                }
                second_order_mixes(c)
            };
            reads.push((q(p, Current), "P_old".into()));
            let r: Vec<(Quantity, &str)> = reads.iter().map(|(q, s)| (*q, s.as_str())).collect();
            b.step(Formula::MomentumRhs { comp: c, order, advecting }, &r, (q(c, Rhs), &f));
            let new = format!("{}_new", up(c));
            if second {
                let old = format!("{}_old", up(c));
                b.step(Formula::Copy, &[(q(c, Current), &new)], (q(c, Current), &old));
            }
            b.step(
                Formula::MomentumSolve { comp: c },
                &[(q(c, Rhs), &f), (q(c, Current), &cur(c))],
                (q(c, Tentative), &new),
            );
        }
        let mut reads: Vec<(Quantity, String)> =
            comps.iter().map(|&c| (q(c, Tentative), format!("{}_new", up(c)))).collect();
        reads.push((q(p, LastIncrement), "P_new".into()));
        let r: Vec<(Quantity, &str)> = reads.iter().map(|(q, s)| (*q, s.as_str())).collect();
        b.step(Formula::PressurePoisson, &r, (q(p, Tentative), "P_new"));
        for &c in &comps {
            let new = format!("{}_new", up(c));
            b.step(
                Formula::Correct { comp: c },
                &[(q(c, Tentative), &new), (q(p, Tentative), "P_new")],
                (q(c, Next), &cur(c)),
            );
        }
        b.step(
            Formula::PressureUpdate,
            &[(q(p, Current), "P_old"), (q(p, Tentative), "P_new")],
            (q(p, Next), "P_old"),
        );

        SlotSchedule { mode: ScheduleMode::Efficient, order, dim, slots: b.slots, entry, steps: b.steps }
    }

    pub fn resident_slots(&self) -> usize {
        self.slots.iter().filter(|s| s.resident).count()
    }

    pub fn slot_name(&self, id: usize) -> &str {
        &self.slots[id].name
    }

    /// Slot holding `q` at entry, if any.
    pub fn entry_slot(&self, q: Quantity) -> Option<usize> {
        self.entry.iter().find(|(_, e)| *e == q).map(|&(s, _)| s)
    }

    /// Non-copy steps as storage-independent dataflow nodes, sorted.
    pub fn dataflow(&self) -> Vec<(Formula, Vec<Quantity>, Option<Quantity>)> {
        let mut nodes: Vec<_> = self
            .steps
            .iter()
            .filter(|s| s.formula != Formula::Copy)
            .map(|s| {
                let mut ins: Vec<Quantity> = s.reads.iter().map(|&(q, _)| q).collect();
                ins.sort();
                (s.formula, ins, Some(s.writes.0))
            })
            .collect();
        nodes.sort();
        nodes
    }

    /// Resident slot count the arrangement is supposed to need.
    pub fn expected_slots(mode: ScheduleMode, order: SchemeOrder, dim: usize) -> usize {
        match (mode, order) {
            (ScheduleMode::Efficient, _) => 2 * dim + 2,
            (ScheduleMode::Classical, SchemeOrder::First) => 3 * dim + 3,
            (ScheduleMode::Classical, SchemeOrder::Second) => 4 * dim + 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Unbound { step: usize, formula: String, quantity: String },
    WrongOutput { step: usize, formula: String, declared: String },
    StaleRead { step: usize, quantity: String, slot: String, holds: String },
    Clobbered { step: usize, lost: String, slot: String, by: String, needed_at: usize },
    ExitState { slot: String, expected: String, holds: String },
    SlotCount { expected: usize, found: usize },
    Dataflow(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Unbound { step, formula, quantity } => {
                write!(f, "step {step}: {formula} needs {quantity} but does not read it")
            }
            Violation::WrongOutput { step, formula, declared } => {
                write!(f, "step {step}: {formula} declared to write {declared}")
            }
            Violation::StaleRead { step, quantity, slot, holds } => {
                write!(f, "step {step}: reads {quantity} from {slot}, which holds {holds}")
            }
            Violation::Clobbered { step, lost, slot, by, needed_at } => write!(
                f,
                "step {step}: {lost} in {slot} clobbered by {by} before its read at step {needed_at}"
            ),
            Violation::ExitState { slot, expected, holds } => {
                write!(f, "after the step {slot} holds {holds}, expected {expected}")
            }
            Violation::SlotCount { expected, found } => {
                write!(f, "{found} resident slots, expected {expected}")
            }
            Violation::Dataflow(s) => write!(f, "dataflow differs from the reference arrangement: {s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleAudit {
    pub resident_slots: usize,
    pub violations: Vec<Violation>,
}

impl ScheduleAudit {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn show(q: Option<Quantity>) -> String {
    q.map_or_else(|| "nothing".to_string(), |q| q.to_string())
}

/// Symbolic run of `s`. Step numbers in the report are 1-based.
pub fn validate_schedule(s: &SlotSchedule) -> ScheduleAudit {
    let mut v = Vec::new();
    let mut state: Vec<Option<Quantity>> = vec![None; s.slots.len()];
    for &(slot, q) in &s.entry {
        state[slot] = Some(q);
    }
    for (k, step) in s.steps.iter().enumerate() {
        let n = k + 1;
        for need in step.formula.inputs(s.dim) {
            if step.slot_of(need).is_none() {
                v.push(Violation::Unbound {
                    step: n,
                    formula: step.formula.to_string(),
                    quantity: need.to_string(),
                });
            }
        }
        let out_ok = match step.formula.output() {
            Some(q) => q == step.writes.0,
            None => step.reads.len() == 1 && step.reads[0].0 == step.writes.0,
        };
        if !out_ok {
            v.push(Violation::WrongOutput {
                step: n,
                formula: step.formula.to_string(),
                declared: step.writes.0.to_string(),
            });
        }
        for &(q, slot) in &step.reads {
            if state[slot] != Some(q) {
                v.push(Violation::StaleRead {
                    step: n,
                    quantity: q.to_string(),
                    slot: s.slot_name(slot).to_string(),
                    holds: show(state[slot]),
                });
            }
        }
        let (q, slot) = step.writes;
        if let Some(old) = state[slot] {
            if old != q {
                let later = s.steps[k + 1..]
                    .iter()
                    .position(|st| st.reads.iter().any(|&(r, rs)| r == old && rs == slot));
                let rewritten = s.steps[k + 1..].iter().position(|st| st.writes == (old, slot));
                if let Some(m) = later {
                    if rewritten.is_none_or(|w| w >= m) {
                        v.push(Violation::Clobbered {
                            step: n,
                            lost: old.to_string(),
                            slot: s.slot_name(slot).to_string(),
                            by: q.to_string(),
                            needed_at: k + 2 + m,
                        });
                    }
                }
            }
        }
        state[slot] = Some(q);
    }
    for &(slot, q) in &s.entry {
        let want = q.advanced();
        if state[slot] != Some(want) {
            v.push(Violation::ExitState {
                slot: s.slot_name(slot).to_string(),
                expected: want.to_string(),
                holds: show(state[slot]),
            });
        }
    }
    let expected = SlotSchedule::expected_slots(s.mode, s.order, s.dim);
    let found = s.resident_slots();
    if expected != found {
        v.push(Violation::SlotCount { expected, found });
    }
    let other = match s.mode {
        ScheduleMode::Classical => SlotSchedule::efficient(s.order, s.dim),
        ScheduleMode::Efficient => SlotSchedule::classical(s.order, s.dim, false),
    };
    let (mine, theirs) = (s.dataflow(), other.dataflow());
    if mine != theirs {
        let missing: Vec<String> =
            theirs.iter().filter(|n| !mine.contains(n)).map(|n| n.0.to_string()).collect();
        let extra: Vec<String> =
            mine.iter().filter(|n| !theirs.contains(n)).map(|n| n.0.to_string()).collect();
        v.push(Violation::Dataflow(format!(
            "only here: [{}]; only in the {} arrangement: [{}]",
            extra.join(", "),
            other.mode,
            missing.join(", ")
        )));
    }
    ScheduleAudit { resident_slots: found, violations: v }
}

/// Quantities resident at entry, keyed by slot name.
pub fn entry_table(s: &SlotSchedule) -> BTreeMap<String, String> {
    s.entry.iter().map(|&(slot, q)| (s.slot_name(slot).to_string(), q.to_string())).collect()
}
