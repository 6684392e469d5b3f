//! The Stallings folding engine.
//!
//! Folding identifies two arcs that violate determinism at a shared
//! endpoint. A fold is *open* when the far endpoints differ (they get
//! merged) and *closed* when the arcs are parallel (one is deleted and the
//! graph rank drops by one). Every fold is recorded in a replayable
//! [`FoldingTrace`], which is what makes membership witnesses possible:
//! a basepoint walk in the folded automaton can be lifted backwards,
//! event by event, to a walk in the original flower automaton.

use std::collections::VecDeque;
use std::fmt;

use crate::automaton::{ArcId, Flower, InvolutiveAutomaton, Step, VertexId};
use crate::error::{Error, Result};
use crate::words::{Alphabet, Letter, Word};

/// Open folds merge two distinct far endpoints; closed folds delete a
/// parallel arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldKind {
    Open,
    Closed,
}

/// One elementary fold. Ids refer to the automaton state just before the
/// event; the survivor arc and vertex keep their ids afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldEvent {
    pub kind: FoldKind,
    /// Positive generator index of the folded arcs.
    pub label: usize,
    pub survivor_arc: ArcId,
    pub absorbed_arc: ArcId,
    /// Far endpoints being merged; equal ids when the fold is closed.
    pub survivor_vertex: VertexId,
    pub absorbed_vertex: VertexId,
    /// The vertex where the determinism violation sat.
    pub shared_endpoint: VertexId,
}

impl fmt::Display for FoldEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            FoldKind::Open => "open",
            FoldKind::Closed => "closed",
        };
        write!(
            f,
            "{kind} {} arcs {}+{} vertices {}+{} at {}",
            Letter::gen(self.label),
            self.survivor_arc.0,
            self.absorbed_arc.0,
            self.survivor_vertex.0,
            self.absorbed_vertex.0,
            self.shared_endpoint.0
        )
    }
}

/// A replayable log of elementary folds together with the automaton they
/// started from. Replaying the events reproduces the folded automaton
/// exactly, including ids.
#[derive(Debug, Clone)]
pub struct FoldingTrace {
    initial: InvolutiveAutomaton,
    events: Vec<FoldEvent>,
}

impl FoldingTrace {
    pub fn initial(&self) -> &InvolutiveAutomaton {
        &self.initial
    }

    pub fn events(&self) -> &[FoldEvent] {
        &self.events
    }

    pub fn closed_fold_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind == FoldKind::Closed)
            .count()
    }

    /// All intermediate automata `A_0 … A_p`, reconstructed by forward
    /// replay.
    pub fn replay(&self) -> Vec<InvolutiveAutomaton> {
        let mut stages = Vec::with_capacity(self.events.len() + 1);
        stages.push(self.initial.clone());
        for event in &self.events {
            let mut next = stages.last().unwrap().clone();
            apply_event(&mut next, event);
            stages.push(next);
        }
        stages
    }

    pub fn final_automaton(&self) -> InvolutiveAutomaton {
        let mut aut = self.initial.clone();
        for event in &self.events {
            apply_event(&mut aut, event);
        }
        aut
    }
}

fn make_event(
    aut: &InvolutiveAutomaton,
    v: VertexId,
    letter: Letter,
    a1: ArcId,
    a2: ArcId,
) -> FoldEvent {
    let far = |id: ArcId| {
        aut.step_end(Step::new(id, !letter.is_inverse()))
            .expect("folded arc must be live")
    };
    let (far1, far2) = (far(a1), far(a2));
    let kind = if far1 == far2 {
        FoldKind::Closed
    } else {
        FoldKind::Open
    };
    FoldEvent {
        kind,
        label: letter.index(),
        survivor_arc: a1,
        absorbed_arc: a2,
        survivor_vertex: far1.min(far2),
        absorbed_vertex: far1.max(far2),
        shared_endpoint: v,
    }
}

fn apply_event(aut: &mut InvolutiveAutomaton, event: &FoldEvent) {
    aut.remove_arc(event.absorbed_arc)
        .expect("absorbed arc must be live");
    if event.kind == FoldKind::Open {
        aut.merge_vertex_into(event.absorbed_vertex, event.survivor_vertex)
            .expect("merged vertices must be live");
    }
}

/// Folds until no determinism violation remains. Deterministic policy: a
/// FIFO worklist of suspect vertices; at each vertex the smallest signed
/// letter and then the smallest arc-id pair folds first, and the lower arc
/// and vertex ids survive.
pub fn fold_to_completion(aut: &InvolutiveAutomaton) -> (InvolutiveAutomaton, FoldingTrace) {
    let initial = aut.clone();
    let mut work = aut.clone();
    let mut events = Vec::new();
    let mut queue: VecDeque<VertexId> = work.vertices().collect();
    while let Some(v) = queue.pop_front() {
        if !work.contains_vertex(v) {
            continue;
        }
        if let Some((letter, a1, a2)) = work.violation_at(v) {
            let event = make_event(&work, v, letter, a1, a2);
            apply_event(&mut work, &event);
            queue.push_back(event.shared_endpoint);
            queue.push_back(event.survivor_vertex);
            events.push(event);
        }
    }
    debug_assert!(work.is_deterministic());
    (work, FoldingTrace { initial, events })
}

/// Folds to completion but lets `pick` choose among all currently available
/// folds; `pick(n)` must return an index below `n`. Confluence makes the
/// choice semantically irrelevant, which the tests exercise.
pub fn fold_to_completion_with(
    aut: &InvolutiveAutomaton,
    mut pick: impl FnMut(usize) -> usize,
) -> (InvolutiveAutomaton, FoldingTrace) {
    let initial = aut.clone();
    let mut work = aut.clone();
    let mut events = Vec::new();
    loop {
        let mut candidates = Vec::new();
        for v in work.vertices() {
            for letter in work.alphabet().signed_letters() {
                let steps = work.steps_reading(v, letter).unwrap();
                for i in 0..steps.len() {
                    for j in i + 1..steps.len() {
                        candidates.push((v, letter, steps[i].arc, steps[j].arc));
                    }
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        let (v, letter, a1, a2) = candidates[pick(candidates.len()) % candidates.len()];
        let event = make_event(&work, v, letter, a1, a2);
        apply_event(&mut work, &event);
        events.push(event);
    }
    (work, FoldingTrace { initial, events })
}

/// Number of closed folds in any complete folding sequence; equals the
/// rank drop from the automaton to the Stallings automaton it folds onto.
pub fn loss(aut: &InvolutiveAutomaton) -> usize {
    fold_to_completion(aut).1.closed_fold_count()
}

/// Lifts a reduced basepoint walk in the folded automaton backwards
/// through the trace, to a basepoint walk in the initial automaton whose
/// reduced label is unchanged.
///
/// Through an open fold, each occurrence of the merged arc resolves to the
/// survivor or absorbed preimage forced by its neighbors, and a cancelling
/// bridge (reading `x⁻¹x` through the shared endpoint) is inserted at each
/// critical visit to the merged vertex, including at the ends of the walk.
/// Through a closed fold every occurrence keeps the survivor arc.
pub fn lift_path(trace: &FoldingTrace, path: &[Step]) -> Result<Vec<Step>> {
    let stages = trace.replay();
    let last = stages.last().unwrap();
    last.check_reduced_walk(path, last.base(), last.base())?;
    let mut walk = path.to_vec();
    for (pre, event) in stages.iter().zip(trace.events()).rev() {
        walk = lift_once(pre, event, &walk)?;
        debug_assert!(pre
            .check_reduced_walk(&walk, pre.base(), pre.base())
            .is_ok());
    }
    debug_assert_eq!(trace.initial.walk_label(&walk)?, last.walk_label(path)?);
    Ok(walk)
}

fn lift_once(pre: &InvolutiveAutomaton, event: &FoldEvent, walk: &[Step]) -> Result<Vec<Step>> {
    if event.kind == FoldKind::Closed {
        return Ok(walk.to_vec());
    }
    let e1 = event.survivor_arc;
    let e2 = event.absorbed_arc;
    // Orientation of the fold: the direction flag that traverses each
    // folded arc outward from the shared endpoint. For open folds at least
    // one of the arcs is not a loop and pins it down.
    let outward = [e1, e2]
        .into_iter()
        .find_map(|id| {
            let arc = pre.arc(id).ok()?;
            if arc.source == arc.target {
                None
            } else {
                Some(arc.source == event.shared_endpoint)
            }
        })
        .expect("open fold cannot identify two loops");
    let far = |id: ArcId| {
        pre.step_end(Step::new(id, outward))
            .expect("folded arc is live")
    };
    let (far1, far2) = (far(e1), far(e2));
    debug_assert_ne!(far1, far2);

    let other_arc = |id: ArcId| if id == e1 { e2 } else { e1 };
    // A step over the merged arc has two preimages, survivor first; both
    // are stored with the same orientation relative to the shared endpoint.
    let realizations = |step: Step| -> Vec<Step> {
        if step.arc == e1 {
            vec![step, Step::new(e2, step.forward)]
        } else {
            vec![step]
        }
    };
    let matching = |cands: &[Step], cur: VertexId| -> Option<Step> {
        cands
            .iter()
            .copied()
            .find(|&c| pre.step_start(c) == Ok(cur))
    };
    // bridge cur → other far endpoint, reading a cancelling x⁻¹x
    let bridge = |cur: VertexId| -> Result<([Step; 2], VertexId)> {
        let (here, there) = if cur == far1 {
            (e1, e2)
        } else if cur == far2 {
            (e2, e1)
        } else {
            return Err(Error::InvalidPath("walk left the folded automaton"));
        };
        Ok((
            [Step::new(here, !outward), Step::new(there, outward)],
            far(there),
        ))
    };

    let mut out: Vec<Step> = Vec::with_capacity(walk.len());
    // whether out[i] is a merged-arc occurrence traversed outward, whose
    // preimage may still be swapped to reconnect with the next step
    let mut swappable: Vec<bool> = Vec::with_capacity(walk.len());
    let mut cur = pre.base();

    let push = |out: &mut Vec<Step>, swappable: &mut Vec<bool>, step: Step, merged: bool| {
        swappable.push(merged && step.forward == outward);
        out.push(step);
    };

    for &step in walk {
        let cands = realizations(step);
        let merged = step.arc == e1;
        if let Some(c) = matching(&cands, cur) {
            cur = pre.step_end(c)?;
            push(&mut out, &mut swappable, c, merged);
            continue;
        }
        // try swapping the previous merged occurrence to land on the far
        // endpoint the next step needs
        if swappable.last().copied().unwrap_or(false) {
            let last = *out.last().unwrap();
            let alt = Step::new(other_arc(last.arc), last.forward);
            let alt_end = pre.step_end(alt)?;
            if let Some(c) = matching(&cands, alt_end) {
                *out.last_mut().unwrap() = alt;
                cur = pre.step_end(c)?;
                push(&mut out, &mut swappable, c, merged);
                continue;
            }
        }
        // critical visit: insert the cancelling bridge through the shared
        // endpoint
        let (steps, end) = bridge(cur)?;
        for s in steps {
            push(&mut out, &mut swappable, s, false);
        }
        cur = end;
        match matching(&cands, cur) {
            Some(c) => {
                cur = pre.step_end(c)?;
                push(&mut out, &mut swappable, c, merged);
            }
            None => return Err(Error::InvalidPath("walk left the folded automaton")),
        }
    }

    if cur != pre.base() {
        // degenerate basepoint case: the lifted walk ends on the wrong
        // preimage of the merged vertex
        let fixed = swappable.last().copied().unwrap_or(false) && {
            let last = *out.last().unwrap();
            let alt = Step::new(other_arc(last.arc), last.forward);
            pre.step_end(alt)? == pre.base() && {
                *out.last_mut().unwrap() = alt;
                true
            }
        };
        if !fixed {
            let (steps, end) = bridge(cur)?;
            if end != pre.base() {
                return Err(Error::InvalidPath("walk does not return to the basepoint"));
            }
            out.extend(steps);
        }
    }
    Ok(out)
}

/// Splits a basepoint walk of a flower automaton into full petal
/// traversals, yielding the corresponding product of generators.
pub fn petal_decompose(flower: &Flower, path: &[Step]) -> Result<PetalWord> {
    let aut = &flower.automaton;
    let base = aut.base();
    aut.check_reduced_walk(path, base, base)?;
    let backwards: Vec<Vec<Step>> = flower
        .petals
        .iter()
        .map(|petal| petal.iter().rev().map(Step::reversed).collect())
        .collect();
    let mut factors = Vec::new();
    let mut segment: Vec<Step> = Vec::new();
    for &step in path {
        segment.push(step);
        if aut.step_end(step)? != base {
            continue;
        }
        let factor = flower
            .petals
            .iter()
            .position(|petal| petal == &segment)
            .map(|k| (k, 1))
            .or_else(|| {
                backwards
                    .iter()
                    .position(|petal| petal == &segment)
                    .map(|k| (k, -1))
            })
            .ok_or(Error::NotAPetalPath)?;
        factors.push(factor);
        segment.clear();
    }
    if !segment.is_empty() {
        return Err(Error::NotAPetalPath);
    }
    Ok(PetalWord { factors })
}

/// A formal product of subgroup generators and their inverses: a
/// membership witness over the original generating family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetalWord {
    /// Pairs of (0-based index into the generator list, exponent ±1).
    factors: Vec<(usize, i8)>,
}

impl PetalWord {
    pub fn new(factors: Vec<(usize, i8)>) -> Self {
        PetalWord { factors }
    }

    pub fn factors(&self) -> &[(usize, i8)] {
        &self.factors
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Multiplies the named generators out to an element of the free group.
    pub fn evaluate(&self, alphabet: Alphabet, generators: &[Word]) -> Result<Word> {
        let mut acc = Word::identity(alphabet);
        for &(index, sign) in &self.factors {
            let gen = generators.get(index).ok_or(Error::GeneratorOutOfRange {
                index: index + 1,
                rank: generators.len(),
            })?;
            let factor = if sign < 0 { gen.invert() } else { gen.clone() };
            acc = acc.multiply(&factor)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for PetalWord {
    /// Renders as a product `v2 v3^-1 v1`, numbering generators from 1.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, &(index, sign)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "v{}", index + 1)?;
            if sign < 0 {
                write!(f, "^-1")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::flower;

    fn f2() -> Alphabet {
        Alphabet::new(2)
    }

    fn wds(alphabet: Alphabet, texts: &[&str]) -> Vec<Word> {
        texts
            .iter()
            .map(|t| Word::parse(alphabet, t).unwrap())
            .collect()
    }

    #[test]
    fn already_deterministic_means_empty_trace() {
        let mut aut = InvolutiveAutomaton::new(f2());
        let v = aut.add_vertex();
        aut.add_arc(aut.base(), 1, v).unwrap();
        aut.add_arc(v, 2, v).unwrap();
        let (folded, trace) = fold_to_completion(&aut);
        assert!(trace.events().is_empty());
        assert_eq!(folded, aut);
    }

    #[test]
    fn stallings_example_folds_to_two_vertices() {
        let fl = flower(f2(), &wds(f2(), &["aaa", "abaB", "AbaB"])).unwrap();
        let (folded, trace) = fold_to_completion(&fl.automaton);
        assert_eq!(folded.vertex_count(), 2);
        assert_eq!(folded.positive_arc_count(), 3);
        assert_eq!(trace.events().len(), 11 - 3);
        assert_eq!(trace.closed_fold_count(), 1);
        assert!(folded.is_deterministic());
        assert_eq!(folded.graph_rank().unwrap(), 2);
    }

    #[test]
    fn two_equal_petals_fold_once_closed() {
        let fl = flower(f2(), &wds(f2(), &["a", "a"])).unwrap();
        let (folded, trace) = fold_to_completion(&fl.automaton);
        assert_eq!(folded.vertex_count(), 1);
        assert_eq!(folded.positive_arc_count(), 1);
        assert_eq!(trace.events().len(), 1);
        assert_eq!(trace.events()[0].kind, FoldKind::Closed);
    }

    #[test]
    fn loss_examples() {
        let free = flower(f2(), &wds(f2(), &["a", "bab"])).unwrap();
        assert_eq!(loss(&free.automaton), 0);
        let dependent = flower(f2(), &wds(f2(), &["aaa", "abaB", "AbaB"])).unwrap();
        assert_eq!(loss(&dependent.automaton), 1);
        let repeated = flower(f2(), &wds(f2(), &["a", "a"])).unwrap();
        assert_eq!(loss(&repeated.automaton), 1);
    }

    #[test]
    fn rank_drop_equals_closed_folds() {
        for texts in [
            &["aaa", "abaB", "AbaB"][..],
            &["a", "a"][..],
            &["ab", "cb"][..],
            &["ba", "baa", "bab"][..],
        ] {
            let alphabet = Alphabet::new(3);
            let fl = flower(alphabet, &wds(alphabet, texts)).unwrap();
            let (folded, trace) = fold_to_completion(&fl.automaton);
            assert_eq!(
                fl.automaton.graph_rank().unwrap(),
                folded.graph_rank().unwrap() + trace.closed_fold_count()
            );
        }
    }

    #[test]
    fn replay_reproduces_the_folded_automaton() {
        let fl = flower(f2(), &wds(f2(), &["aaa", "abaB", "AbaB"])).unwrap();
        let (folded, trace) = fold_to_completion(&fl.automaton);
        assert_eq!(trace.final_automaton(), folded);
        assert_eq!(trace.replay().last().unwrap(), &folded);
    }

    #[test]
    fn lift_empty_path() {
        let fl = flower(f2(), &wds(f2(), &["aaa", "abaB", "AbaB"])).unwrap();
        let (_, trace) = fold_to_completion(&fl.automaton);
        assert_eq!(lift_path(&trace, &[]).unwrap(), Vec::new());
    }

    #[test]
    fn lift_inserts_bridge_at_critical_visit() {
        // the b-arcs of flower({ab, cb}) fold; a loop reading aC lifts to
        // one reading abBC, a full traversal of petal 1 then petal 2 back
        let alphabet = Alphabet::new(3);
        let fl = flower(alphabet, &wds(alphabet, &["ab", "cb"])).unwrap();
        let (folded, trace) = fold_to_completion(&fl.automaton);
        let target = Word::parse(alphabet, "aC").unwrap();
        let (walk, end) = folded
            .walk_reading(folded.base(), &target)
            .unwrap()
            .unwrap();
        assert_eq!(end, folded.base());
        let lifted = lift_path(&trace, &walk).unwrap();
        let label: Vec<Letter> = lifted
            .iter()
            .map(|&s| fl.automaton.step_letter(s).unwrap())
            .collect();
        let text: String = label.iter().map(|l| l.to_string()).collect();
        assert_eq!(text, "abBC");
        let decomposed = petal_decompose(&fl, &lifted).unwrap();
        assert_eq!(decomposed.factors(), &[(0, 1), (1, -1)]);
    }

    #[test]
    fn lift_resolves_preimages_without_bridges() {
        // the a-arcs of flower({ab, ac}) fold; a loop reading abCA lifts
        // label-identically
        let alphabet = Alphabet::new(3);
        let fl = flower(alphabet, &wds(alphabet, &["ab", "ac"])).unwrap();
        let (folded, trace) = fold_to_completion(&fl.automaton);
        let target = Word::parse(alphabet, "abCA").unwrap();
        let (walk, end) = folded
            .walk_reading(folded.base(), &target)
            .unwrap()
            .unwrap();
        assert_eq!(end, folded.base());
        let lifted = lift_path(&trace, &walk).unwrap();
        assert_eq!(lifted.len(), walk.len());
        let text: String = lifted
            .iter()
            .map(|&s| fl.automaton.step_letter(s).unwrap().to_string())
            .collect();
        assert_eq!(text, "abCA");
        let decomposed = petal_decompose(&fl, &lifted).unwrap();
        assert_eq!(decomposed.factors(), &[(0, 1), (1, -1)]);
    }

    #[test]
    fn petal_decompose_simple_cases() {
        let fl = flower(f2(), &wds(f2(), &["ab", "ba"])).unwrap();
        let base = fl.automaton.base();
        // petal 1 forward then petal 2 backward
        let mut path = fl.petals[0].clone();
        path.extend(fl.petals[1].iter().rev().map(Step::reversed));
        fl.automaton.check_reduced_walk(&path, base, base).unwrap();
        let pw = petal_decompose(&fl, &path).unwrap();
        assert_eq!(pw.factors(), &[(0, 1), (1, -1)]);
        assert_eq!(pw.to_string(), "v1 v2^-1");

        assert!(petal_decompose(&fl, &[]).unwrap().is_empty());
    }

    #[test]
    fn petal_word_evaluation() {
        let gens = wds(f2(), &["ab", "ba"]);
        let pw = PetalWord::new(vec![(0, 1), (1, -1)]);
        let value = pw.evaluate(f2(), &gens).unwrap();
        assert_eq!(value, Word::parse(f2(), "abAB").unwrap());
        assert!(PetalWord::new(vec![(5, 1)]).evaluate(f2(), &gens).is_err());
    }

    #[test]
    fn lift_rejects_malformed_paths() {
        let fl = flower(f2(), &wds(f2(), &["aaa", "abaB", "AbaB"])).unwrap();
        let (folded, trace) = fold_to_completion(&fl.automaton);
        let target = Word::parse(f2(), "a").unwrap();
        let (walk, _) = folded
            .walk_reading(folded.base(), &target)
            .unwrap()
            .unwrap();
        // backtracking walk
        let mut backtracking = walk.clone();
        backtracking.push(walk[0].reversed());
        backtracking.push(walk[0]);
        assert!(lift_path(&trace, &backtracking).is_err());
        // walk referencing an arc that is dead in the folded automaton
        let dead = fl
            .automaton
            .arcs()
            .map(|a| a.id)
            .find(|&id| folded.arc(id).is_err())
            .unwrap();
        assert!(lift_path(&trace, &[Step::new(dead, true)]).is_err());
        // walk not returning to the basepoint
        let b_step = folded.steps_reading(folded.base(), Letter::gen(2)).unwrap()[0];
        assert!(lift_path(&trace, &[b_step]).is_err());
    }

    #[test]
    fn petal_decompose_rejects_foreign_petal_tables() {
        let fl = flower(f2(), &wds(f2(), &["ab", "ba"])).unwrap();
        let mut mangled = fl.clone();
        mangled.petals[0].truncate(1);
        let mut path = fl.petals[0].clone();
        path.extend(fl.petals[1].clone());
        assert_eq!(
            petal_decompose(&mangled, &path),
            Err(crate::error::Error::NotAPetalPath)
        );
    }

    #[test]
    fn shuffled_folding_is_confluent() {
        // a crude xorshift is plenty for shuffling fold choices
        let mut state = 0x243f6a8885a308d3u64;
        let mut rng = move |n: usize| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % n as u64) as usize
        };
        let fl = flower(f2(), &wds(f2(), &["aaa", "abaB", "AbaB"])).unwrap();
        let (folded, trace) = fold_to_completion(&fl.automaton);
        for _ in 0..5 {
            let (shuffled, strace) = fold_to_completion_with(&fl.automaton, &mut rng);
            assert!(shuffled.isomorphic_based(&folded).is_some());
            assert_eq!(strace.closed_fold_count(), trace.closed_fold_count());
        }
    }
}
