//! Deterministic discrete-event execution of a behavior model.
//!
//! A scenario supplies stimulus ticks. Every tick opens a *round*: root
//! events (no predecessors) start at the tick time if they are marked
//! `repeat` or have not occurred yet. An event finishes `duration` after it
//! starts, the duration coming from the tick's processing delays or the
//! event spec. A successor starts once every predecessor has finished in
//! the same round, at the latest of their finish times. Instances of one
//! event never overlap: a new instance waits for the previous one.
//!
//! Branches are decided when their event starts, from the measurements of
//! the latest tick at or before that time. Wap constraints are evaluated
//! as soon as both endpoints of a pair exist. A violation records a
//! warning, stops the violating instance from enabling its successors,
//! and, when the warning id names an event, starts that event. Events
//! named as warnings only ever start this way.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{Code, Diagnostic, Diagnostics};
use crate::events::{Anchor, BehaviorModel, DynamicModel, WapConstraint};
use crate::graph;
use crate::time::TimeValue;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub time: TimeValue,
    pub measurements: BTreeMap<String, f64>,
    /// Per-event processing time overriding the event's declared duration.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub delays: BTreeMap<String, TimeValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub ticks: Vec<Tick>,
}

/// Structural checks: strictly increasing tick times, one measurement
/// vocabulary across ticks, delays naming known events.
pub fn check_scenario(scenario: &Scenario, dynamic: &DynamicModel) -> Diagnostics {
    let mut out = Diagnostics::new();
    let loc = format!("scenario {}", scenario.name);
    if scenario.ticks.is_empty() {
        out.push(Diagnostic::error(
            Code::InvalidScenario,
            &loc,
            "scenario has no ticks",
        ));
    }
    for pair in scenario.ticks.windows(2) {
        if pair[1].time.micros() <= pair[0].time.micros() {
            out.push(Diagnostic::error(
                Code::InvalidScenario,
                &loc,
                format!(
                    "tick {} does not come after tick {}",
                    pair[1].time, pair[0].time
                ),
            ));
        }
    }
    if let Some(first) = scenario.ticks.first() {
        let names: BTreeSet<&String> = first.measurements.keys().collect();
        for t in &scenario.ticks[1..] {
            if t.measurements.keys().collect::<BTreeSet<_>>() != names {
                out.push(Diagnostic::error(
                    Code::InvalidScenario,
                    &loc,
                    format!(
                        "tick {} measures a different set of names than tick {}",
                        t.time, first.time
                    ),
                ));
            }
        }
    }
    for t in &scenario.ticks {
        for e in t.delays.keys() {
            if dynamic.event(e).is_none() {
                out.push(Diagnostic::error(
                    Code::UnknownReference,
                    &loc,
                    format!("delay names unknown event `{e}`"),
                ));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub event: String,
    /// Occurrence index of this event, from 0.
    pub instance: usize,
    /// Index of the tick whose stimulus led to this instance.
    pub round: usize,
    pub start: TimeValue,
    pub finish: TimeValue,
    /// Guard text -> outcome, for instances of branching events.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub guard_results: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRef {
    pub event: String,
    pub instance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub warning_id: String,
    /// Position of the violated constraint in the constraint list.
    pub constraint: usize,
    pub earlier: InstanceRef,
    pub later: InstanceRef,
    pub separation: TimeValue,
    pub bound: TimeValue,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    /// Ordered by start time, then position in the id-smallest topological
    /// order of the behavior, then instance.
    pub entries: Vec<TraceEntry>,
    pub warnings: Vec<Warning>,
}

impl Trace {
    pub fn instances_of<'a>(&'a self, event: &'a str) -> impl Iterator<Item = &'a TraceEntry> {
        self.entries.iter().filter(move |e| e.event == event)
    }

    /// Line-oriented text: `t=<us> <event>#<n> start|finish` in time order,
    /// then `WARN <id> sep=<us> bound=<us>` per warning.
    pub fn to_text(&self) -> String {
        // At one instant: finishes of instances that started earlier, then
        // each instance starting now, with its finish right after its start
        // when it is instantaneous.
        let mut points: Vec<(u64, u8, usize, u8)> = Vec::with_capacity(self.entries.len() * 2);
        for (i, e) in self.entries.iter().enumerate() {
            let (s, f) = (e.start.micros(), e.finish.micros());
            points.push((s, 1, i, 0));
            points.push((f, if f == s { 1 } else { 0 }, i, 1));
        }
        points.sort_unstable();
        let mut out = String::new();
        for (t, _, i, which) in points {
            let e = &self.entries[i];
            let what = if which == 0 { "start" } else { "finish" };
            let _ = writeln!(out, "t={t} {}#{} {what}", e.event, e.instance);
        }
        for w in &self.warnings {
            let _ = writeln!(
                out,
                "WARN {} sep={} bound={}",
                w.warning_id,
                w.separation.micros(),
                w.bound.micros()
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("branch at `{event}` reads measurement `{measurement}`, which the scenario does not provide")]
    GuardMeasurementMissing { event: String, measurement: String },
    #[error("no tick fits in the horizon: first tick at {first_tick}, horizon {horizon}")]
    HorizonTooSmall {
        first_tick: TimeValue,
        horizon: TimeValue,
    },
    #[error("horizon must be positive")]
    ZeroHorizon,
    #[error("scenario `{0}` has no ticks")]
    EmptyScenario(String),
    #[error("invalid scenario:\n{0}")]
    InvalidScenario(String),
    #[error("behavior event `{0}` has no event spec")]
    UnknownEvent(String),
    #[error("behavior contains a cycle")]
    CyclicBehavior,
}

struct Static<'a> {
    behavior: &'a BehaviorModel,
    constraints: &'a [WapConstraint],
    scenario: &'a Scenario,
    horizon: u64,
    names: Vec<&'a str>,
    duration: Vec<u64>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    rank: Vec<usize>,
    repeat: Vec<bool>,
    arm_target: Vec<bool>,
    warning_gated: Vec<bool>,
    branch: Vec<Option<usize>>,
    index: HashMap<&'a str, usize>,
}

struct Instance {
    event: usize,
    instance: usize,
    round: usize,
    start: u64,
    finish: u64,
    guard_results: BTreeMap<String, bool>,
    /// Index of the first arm whose guard held, for branching events.
    chosen: Option<usize>,
    suppressed: bool,
    completed: bool,
}

struct Engine<'a> {
    s: Static<'a>,
    instances: Vec<Instance>,
    count: Vec<usize>,
    last_finish: Vec<Option<u64>>,
    in_round: HashMap<(usize, usize), usize>,
    tokens: BTreeMap<(usize, usize), BTreeMap<usize, u64>>,
    queue: BinaryHeap<Reverse<(u64, u64, usize)>>,
    seq: u64,
    evaluated: BTreeSet<(usize, usize)>,
    warnings: Vec<(usize, usize, Warning)>,
}

/// Runs `behavior` against `scenario` up to `horizon`. Instances that
/// would finish after the horizon are not started.
pub fn simulate(
    behavior: &BehaviorModel,
    dynamic: &DynamicModel,
    constraints: &[WapConstraint],
    scenario: &Scenario,
    horizon: TimeValue,
) -> Result<Trace, SimError> {
    if horizon.is_zero() {
        return Err(SimError::ZeroHorizon);
    }
    if scenario.ticks.is_empty() {
        return Err(SimError::EmptyScenario(scenario.name.clone()));
    }
    let problems = check_scenario(scenario, dynamic);
    if problems.has_errors() {
        let text: Vec<String> = problems.iter().map(|d| format!("  {d}")).collect();
        return Err(SimError::InvalidScenario(text.join("\n")));
    }
    let first_tick = scenario.ticks[0].time;
    if first_tick.micros() > horizon.micros() {
        return Err(SimError::HorizonTooSmall {
            first_tick,
            horizon,
        });
    }
    for br in &behavior.branches {
        for arm in &br.arms {
            for m in arm.guard.measurements() {
                if !scenario.ticks[0].measurements.contains_key(m) {
                    return Err(SimError::GuardMeasurementMissing {
                        event: br.at.clone(),
                        measurement: m.to_string(),
                    });
                }
            }
        }
    }

    let s = prepare(behavior, dynamic, constraints, scenario, horizon.micros())?;
    let n = s.names.len();
    let mut engine = Engine {
        s,
        instances: Vec::new(),
        count: vec![0; n],
        last_finish: vec![None; n],
        in_round: HashMap::new(),
        tokens: BTreeMap::new(),
        queue: BinaryHeap::new(),
        seq: 0,
        evaluated: BTreeSet::new(),
        warnings: Vec::new(),
    };
    engine.run();
    Ok(engine.into_trace())
}

fn prepare<'a>(
    behavior: &'a BehaviorModel,
    dynamic: &'a DynamicModel,
    constraints: &'a [WapConstraint],
    scenario: &'a Scenario,
    horizon: u64,
) -> Result<Static<'a>, SimError> {
    let names: Vec<&str> = behavior.events.iter().map(String::as_str).collect();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let n = names.len();
    let lookup = |id: &str| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| SimError::UnknownEvent(id.to_string()))
    };

    let mut duration = Vec::with_capacity(n);
    for id in &names {
        let spec = dynamic
            .event(id)
            .ok_or_else(|| SimError::UnknownEvent(id.to_string()))?;
        duration.push(spec.duration.map_or(0, TimeValue::micros));
    }

    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for (a, b) in behavior.all_edges() {
        let (a, b) = (lookup(&a)?, lookup(&b)?);
        preds[b].push(a);
        succs[a].push(b);
        edges.push((a, b));
    }
    let adj = graph::adjacency(n, edges);
    let mut by_id: Vec<usize> = (0..n).collect();
    by_id.sort_by_key(|&i| names[i]);
    let mut id_rank = vec![0; n];
    for (pos, &v) in by_id.iter().enumerate() {
        id_rank[v] = pos;
    }
    let order = graph::topological_order(&adj, &id_rank).ok_or(SimError::CyclicBehavior)?;
    let mut rank = vec![0; n];
    for (pos, &v) in order.iter().enumerate() {
        rank[v] = pos;
    }

    let mut repeat = vec![false; n];
    for r in &behavior.repeats {
        repeat[lookup(r)?] = true;
    }
    let mut arm_target = vec![false; n];
    let mut branch = vec![None; n];
    for (bi, br) in behavior.branches.iter().enumerate() {
        branch[lookup(&br.at)?] = Some(bi);
        for arm in &br.arms {
            arm_target[lookup(&arm.to)?] = true;
        }
    }
    let mut warning_gated = vec![false; n];
    for c in constraints {
        lookup(&c.earlier.event)?;
        lookup(&c.later.event)?;
        if let Some(&w) = index.get(c.warning_id.as_str()) {
            warning_gated[w] = true;
        }
    }

    Ok(Static {
        behavior,
        constraints,
        scenario,
        horizon,
        names,
        duration,
        preds,
        succs,
        rank,
        repeat,
        arm_target,
        warning_gated,
        branch,
        index,
    })
}

fn instant(i: &Instance, anchor: Anchor) -> u64 {
    match anchor {
        Anchor::Start => i.start,
        Anchor::Finish => i.finish,
    }
}

impl Engine<'_> {
    fn run(&mut self) {
        let ticks = &self.s.scenario.ticks;
        for (round, tick) in ticks.iter().enumerate() {
            let t = tick.time.micros();
            if t > self.s.horizon {
                break;
            }
            self.drain(Some(t));
            for e in 0..self.s.names.len() {
                let is_root = self.s.preds[e].is_empty() && !self.s.warning_gated[e];
                if is_root && (self.s.repeat[e] || self.count[e] == 0) {
                    self.start(e, round, t);
                }
            }
        }
        self.drain(None);
    }

    fn drain(&mut self, until: Option<u64>) {
        while let Some(&Reverse((t, _, idx))) = self.queue.peek() {
            if until.is_some_and(|u| t > u) {
                break;
            }
            self.queue.pop();
            self.complete(idx);
        }
    }

    fn may_occur(&self, e: usize) -> bool {
        self.s.repeat[e] || self.s.arm_target[e] || self.count[e] == 0
    }

    fn tick_at(&self, t: u64) -> usize {
        let ticks = &self.s.scenario.ticks;
        ticks
            .partition_point(|tick| tick.time.micros() <= t)
            .saturating_sub(1)
    }

    fn start(&mut self, e: usize, round: usize, ready: u64) {
        if !self.may_occur(e) || self.in_round.contains_key(&(round, e)) {
            return;
        }
        let start = ready.max(self.last_finish[e].unwrap_or(0));
        let tick = &self.s.scenario.ticks[self.tick_at(start)];
        let duration = tick
            .delays
            .get(self.s.names[e])
            .map_or(self.s.duration[e], |d| d.micros());
        let finish = start.saturating_add(duration);
        if finish > self.s.horizon {
            return;
        }

        let mut guard_results = BTreeMap::new();
        let mut chosen = None;
        if let Some(bi) = self.s.branch[e] {
            for (ai, arm) in self.s.behavior.branches[bi].arms.iter().enumerate() {
                // Measurement presence was checked up front.
                let holds = arm.guard.eval(&tick.measurements).unwrap_or(false);
                guard_results.insert(arm.guard.to_string(), holds);
                if holds && chosen.is_none() {
                    chosen = Some(ai);
                }
            }
        }

        let idx = self.instances.len();
        self.instances.push(Instance {
            event: e,
            instance: self.count[e],
            round,
            start,
            finish,
            guard_results,
            chosen,
            suppressed: false,
            completed: false,
        });
        self.count[e] += 1;
        self.last_finish[e] = Some(finish);
        self.in_round.insert((round, e), idx);
        self.queue.push(Reverse((finish, self.seq, idx)));
        self.seq += 1;

        for ci in 0..self.s.constraints.len() {
            let c = &self.s.constraints[ci];
            let name = self.s.names[e];
            if c.earlier.event == name || c.later.event == name {
                self.evaluate(ci, round);
            }
        }
    }

    fn evaluate(&mut self, ci: usize, round: usize) {
        let c = &self.s.constraints[ci];
        let (Some(&ea), Some(&eb)) = (
            self.s.index.get(c.earlier.event.as_str()),
            self.s.index.get(c.later.event.as_str()),
        ) else {
            return;
        };
        let (Some(&ia), Some(&ib)) = (
            self.in_round.get(&(round, ea)),
            self.in_round.get(&(round, eb)),
        ) else {
            return;
        };
        if !self.evaluated.insert((ci, round)) {
            return;
        }
        let Some(w) = wap_violation(
            ci,
            c,
            &self.instances[ia],
            &self.instances[ib],
            &self.s.names,
        ) else {
            return;
        };
        let later_instant = instant(&self.instances[ib], c.later.anchor);
        self.warnings.push((round, ci, w));
        if !self.instances[ib].completed {
            self.instances[ib].suppressed = true;
        }
        if let Some(&we) = self.s.index.get(c.warning_id.as_str()) {
            let ready = self.s.preds[we]
                .iter()
                .filter_map(|p| self.in_round.get(&(round, *p)))
                .map(|&i| self.instances[i].finish)
                .fold(later_instant, u64::max);
            self.start(we, round, ready);
        }
    }

    fn complete(&mut self, idx: usize) {
        self.instances[idx].completed = true;
        let inst = &self.instances[idx];
        if inst.suppressed {
            return;
        }
        let (e, round, finish, chosen) = (inst.event, inst.round, inst.finish, inst.chosen);
        let branch = self.s.branch[e].map(|bi| &self.s.behavior.branches[bi]);
        if let Some(br) = branch {
            if chosen.is_none() && !br.else_skip {
                return;
            }
        }
        let chosen_target = branch
            .zip(chosen)
            .map(|(br, ai)| self.s.index[br.arms[ai].to.as_str()]);
        let governed: Vec<usize> = branch
            .map(|br| {
                br.arms
                    .iter()
                    .map(|a| self.s.index[a.to.as_str()])
                    .collect()
            })
            .unwrap_or_default();

        let succs = self.s.succs[e].clone();
        for s in succs {
            if self.s.warning_gated[s] {
                continue;
            }
            if governed.contains(&s) && chosen_target != Some(s) {
                continue;
            }
            self.deliver(round, s, e, finish);
        }
    }

    fn deliver(&mut self, round: usize, to: usize, from: usize, at: u64) {
        let slot = self.tokens.entry((round, to)).or_default();
        slot.insert(from, at);
        if slot.len() == self.s.preds[to].len() {
            let ready = slot.values().copied().max().unwrap_or(at);
            self.tokens.remove(&(round, to));
            self.start(to, round, ready);
        }
    }

    fn into_trace(self) -> Trace {
        let names = &self.s.names;
        let rank = &self.s.rank;
        let mut order: Vec<&Instance> = self.instances.iter().collect();
        order.sort_by_key(|i| (i.start, rank[i.event], i.instance));
        let entries = order
            .into_iter()
            .map(|i| TraceEntry {
                event: names[i.event].to_string(),
                instance: i.instance,
                round: i.round,
                start: TimeValue::from_micros(i.start),
                finish: TimeValue::from_micros(i.finish),
                guard_results: i.guard_results.clone(),
            })
            .collect();
        let mut warnings = self.warnings;
        warnings.sort_by_key(|(round, ci, _)| (*round, *ci));
        Trace {
            entries,
            warnings: warnings.into_iter().map(|(_, _, w)| w).collect(),
        }
    }
}

trait Timed {
    fn event_name<'n>(&self, names: &[&'n str]) -> &'n str;
    fn instance(&self) -> usize;
    fn at(&self, anchor: Anchor) -> u64;
}

impl Timed for Instance {
    fn event_name<'n>(&self, names: &[&'n str]) -> &'n str {
        names[self.event]
    }
    fn instance(&self) -> usize {
        self.instance
    }
    fn at(&self, anchor: Anchor) -> u64 {
        instant(self, anchor)
    }
}

impl Timed for TraceEntry {
    fn event_name<'n>(&self, _: &[&'n str]) -> &'n str {
        unreachable!("trace entries carry their own names")
    }
    fn instance(&self) -> usize {
        self.instance
    }
    fn at(&self, anchor: Anchor) -> u64 {
        match anchor {
            Anchor::Start => self.start.micros(),
            Anchor::Finish => self.finish.micros(),
        }
    }
}

fn separation_exceeds(earlier: u64, later: u64, bound: u64) -> Option<u64> {
    // A later instant before the earlier one is a negative separation,
    // which never exceeds a bound.
    let sep = later.checked_sub(earlier)?;
    (sep > bound).then_some(sep)
}

fn wap_violation(
    ci: usize,
    c: &WapConstraint,
    earlier: &Instance,
    later: &Instance,
    names: &[&str],
) -> Option<Warning> {
    let bound = c.max_separation.micros();
    let sep = separation_exceeds(
        earlier.at(c.earlier.anchor),
        later.at(c.later.anchor),
        bound,
    )?;
    Some(Warning {
        warning_id: c.warning_id.clone(),
        constraint: ci,
        earlier: InstanceRef {
            event: earlier.event_name(names).to_string(),
            instance: earlier.instance(),
        },
        later: InstanceRef {
            event: later.event_name(names).to_string(),
            instance: later.instance(),
        },
        separation: TimeValue::from_micros(sep),
        bound: c.max_separation,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WapCheck {
    pub warnings: Vec<Warning>,
    /// Constraints naming an event that never occurs in the trace.
    pub unevaluated: Vec<usize>,
}

/// Re-checks a finished trace: pairs instances of the constrained events
/// from the same round and reports each pair whose separation is strictly
/// greater than the bound.
pub fn check_wap(trace: &Trace, constraints: &[WapConstraint]) -> WapCheck {
    let mut by_round: HashMap<(&str, usize), &TraceEntry> = HashMap::new();
    let mut present: BTreeSet<&str> = BTreeSet::new();
    let mut rounds: BTreeSet<usize> = BTreeSet::new();
    for e in &trace.entries {
        by_round.insert((e.event.as_str(), e.round), e);
        present.insert(e.event.as_str());
        rounds.insert(e.round);
    }
    let mut found: Vec<(usize, usize, Warning)> = Vec::new();
    let mut unevaluated = Vec::new();
    for (ci, c) in constraints.iter().enumerate() {
        if !present.contains(c.earlier.event.as_str()) || !present.contains(c.later.event.as_str())
        {
            unevaluated.push(ci);
            continue;
        }
        for &round in &rounds {
            let (Some(a), Some(b)) = (
                by_round.get(&(c.earlier.event.as_str(), round)),
                by_round.get(&(c.later.event.as_str(), round)),
            ) else {
                continue;
            };
            let bound = c.max_separation.micros();
            if let Some(sep) =
                separation_exceeds(a.at(c.earlier.anchor), b.at(c.later.anchor), bound)
            {
                found.push((
                    round,
                    ci,
                    Warning {
                        warning_id: c.warning_id.clone(),
                        constraint: ci,
                        earlier: InstanceRef {
                            event: a.event.clone(),
                            instance: a.instance,
                        },
                        later: InstanceRef {
                            event: b.event.clone(),
                            instance: b.instance,
                        },
                        separation: TimeValue::from_micros(sep),
                        bound: c.max_separation,
                    },
                ));
            }
        }
    }
    found.sort_by_key(|(round, ci, _)| (*round, *ci));
    WapCheck {
        warnings: found.into_iter().map(|(_, _, w)| w).collect(),
        unevaluated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{Endpoint, EventSpec};

    fn single_event_trace(duration_us: u64) -> (Trace, Vec<WapConstraint>) {
        let trace = Trace {
            entries: vec![TraceEntry {
                event: "E1".into(),
                instance: 0,
                round: 0,
                start: TimeValue::ZERO,
                finish: TimeValue::from_micros(duration_us),
                guard_results: BTreeMap::new(),
            }],
            warnings: vec![],
        };
        let c = WapConstraint {
            earlier: Endpoint {
                event: "E1".into(),
                anchor: Anchor::Start,
            },
            later: Endpoint {
                event: "E1".into(),
                anchor: Anchor::Finish,
            },
            max_separation: TimeValue::ms(5),
            warning_id: "W".into(),
        };
        (trace, vec![c])
    }

    #[test]
    fn bound_is_inclusive() {
        let (t, c) = single_event_trace(5_000);
        assert!(check_wap(&t, &c).warnings.is_empty());
        let (t, c) = single_event_trace(5_001);
        let w = check_wap(&t, &c).warnings;
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].separation.micros(), 5_001);
        assert_eq!(w[0].bound.micros(), 5_000);
        let (t, _) = single_event_trace(9_000);
        assert!(check_wap(&t, &[]).warnings.is_empty());
    }

    #[test]
    fn absent_events_are_unevaluated() {
        let (t, mut c) = single_event_trace(1);
        c[0].later.event = "E2".into();
        let r = check_wap(&t, &c);
        assert!(r.warnings.is_empty());
        assert_eq!(r.unevaluated, vec![0]);
    }

    fn one_tick(ms: u64) -> Scenario {
        Scenario {
            name: "s".into(),
            ticks: vec![Tick {
                time: TimeValue::ms(ms),
                measurements: BTreeMap::new(),
                delays: BTreeMap::new(),
            }],
        }
    }

    #[test]
    fn empty_behavior_gives_empty_trace() {
        let t = simulate(
            &BehaviorModel::default(),
            &DynamicModel::default(),
            &[],
            &one_tick(0),
            TimeValue::ms(10),
        )
        .unwrap();
        assert_eq!(t, Trace::default());
        assert_eq!(t.to_text(), "");
    }

    #[test]
    fn argument_errors() {
        let b = BehaviorModel::default();
        let d = DynamicModel::default();
        assert_eq!(
            simulate(&b, &d, &[], &one_tick(0), TimeValue::ZERO),
            Err(SimError::ZeroHorizon)
        );
        assert!(matches!(
            simulate(&b, &d, &[], &one_tick(20), TimeValue::ms(10)),
            Err(SimError::HorizonTooSmall { .. })
        ));
        let empty = Scenario {
            name: "e".into(),
            ticks: vec![],
        };
        assert!(matches!(
            simulate(&b, &d, &[], &empty, TimeValue::ms(10)),
            Err(SimError::EmptyScenario(_))
        ));
        let b = BehaviorModel {
            events: vec!["X".into()],
            ..Default::default()
        };
        assert_eq!(
            simulate(&b, &d, &[], &one_tick(0), TimeValue::ms(10)),
            Err(SimError::UnknownEvent("X".into()))
        );
    }

    #[test]
    fn successors_wait_for_all_predecessors() {
        let d = DynamicModel {
            events: vec![
                EventSpec::new("A", "CA").with_duration(TimeValue::ms(1)),
                EventSpec::new("B", "CB").with_duration(TimeValue::ms(3)),
                EventSpec::new("J", "CJ").with_duration(TimeValue::ms(2)),
            ],
        };
        let b = BehaviorModel {
            events: vec!["A".into(), "B".into(), "J".into()],
            edges: [("A".to_string(), "J".to_string()), ("B".into(), "J".into())].into(),
            ..Default::default()
        };
        let t = simulate(&b, &d, &[], &one_tick(0), TimeValue::ms(100)).unwrap();
        let j: Vec<_> = t.instances_of("J").collect();
        assert_eq!(j.len(), 1);
        assert_eq!(j[0].start.micros(), 3_000);
        assert_eq!(j[0].finish.micros(), 5_000);
        assert_eq!(
            t.to_text(),
            "t=0 A#0 start\nt=0 B#0 start\nt=1000 A#0 finish\nt=3000 B#0 finish\n\
             t=3000 J#0 start\nt=5000 J#0 finish\n"
        );
        // A horizon that cuts J off drops it.
        let t = simulate(&b, &d, &[], &one_tick(0), TimeValue::ms(4)).unwrap();
        assert_eq!(t.instances_of("J").count(), 0);
    }

    #[test]
    fn non_repeating_roots_occur_once() {
        let d = DynamicModel {
            events: vec![
                EventSpec::new("R", "C1").with_duration(TimeValue::ms(1)),
                EventSpec::new("O", "C2"),
            ],
        };
        let b = BehaviorModel {
            events: vec!["R".into(), "O".into()],
            repeats: ["R".to_string()].into(),
            ..Default::default()
        };
        let s = Scenario {
            name: "s".into(),
            ticks: (0..3)
                .map(|i| Tick {
                    time: TimeValue::ms(i * 10),
                    measurements: BTreeMap::new(),
                    delays: BTreeMap::new(),
                })
                .collect(),
        };
        let t = simulate(&b, &d, &[], &s, TimeValue::ms(100)).unwrap();
        assert_eq!(t.instances_of("R").count(), 3);
        assert_eq!(t.instances_of("O").count(), 1);
    }

    #[test]
    fn overlapping_instances_are_serialized() {
        let d = DynamicModel {
            events: vec![EventSpec::new("R", "C1").with_duration(TimeValue::ms(4))],
        };
        let b = BehaviorModel {
            events: vec!["R".into()],
            repeats: ["R".to_string()].into(),
            ..Default::default()
        };
        let s = Scenario {
            name: "s".into(),
            ticks: [0, 1]
                .map(|ms| Tick {
                    time: TimeValue::ms(ms),
                    measurements: BTreeMap::new(),
                    delays: BTreeMap::new(),
                })
                .to_vec(),
        };
        let t = simulate(&b, &d, &[], &s, TimeValue::ms(100)).unwrap();
        let starts: Vec<u64> = t.entries.iter().map(|e| e.start.micros()).collect();
        assert_eq!(starts, vec![0, 4_000]);
    }

    #[test]
    fn scenario_shape_checks() {
        let mut s = one_tick(5);
        s.ticks.push(Tick {
            time: TimeValue::ms(5),
            measurements: [("x".to_string(), 1.0)].into(),
            delays: [("Nope".to_string(), TimeValue::ms(1))].into(),
        });
        let d = check_scenario(&s, &DynamicModel::default());
        assert_eq!(d.error_count(), 3, "{d:?}");
    }
}
