//! Backtracking over vector strong subtrees of finite hosts.
//!
//! The order is fixed: level sets in lex order, then root tuples in lex order,
//! then the remaining nodes level by level, coordinate by coordinate, each slot
//! trying its candidates in lex order. A search space is split into units, one
//! per (level set, root tuple) pair, so that units can be processed
//! independently and merged into the same answer a sequential run gives.

use alloc::vec::Vec;
use core::fmt;

use crate::subtree::{StrongSubtree, VectorStrongSubtree};
use crate::tree::{Node, Tree, TreeError};

const STOP_POLL_INTERVAL: u64 = 4096;

/// Resource limits for a search. `stop` is polled periodically; returning `true` aborts.
#[derive(Clone, Copy, Default)]
pub struct Budget<'a> {
    pub max_expansions: Option<u64>,
    pub stop: Option<&'a (dyn Fn() -> bool + Sync)>,
}

impl<'a> Budget<'a> {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn expansions(max: u64) -> Self {
        Budget { max_expansions: Some(max), stop: None }
    }

    fn stopped(&self) -> bool {
        self.stop.is_some_and(|f| f())
    }
}

impl fmt::Debug for Budget<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Budget")
            .field("max_expansions", &self.max_expansions)
            .field("stop", &self.stop.is_some())
            .finish()
    }
}

/// Decides which level-product elements a subtree may use. `root` is the
/// element at the subtree's lowest level.
pub trait Containment: Sync {
    fn accepts(&self, root: &[Node], element: &[Node]) -> bool;
}

/// Accepts everything; turns the search into plain enumeration.
#[derive(Clone, Copy, Debug, Default)]
pub struct AcceptAll;

impl Containment for AcceptAll {
    fn accepts(&self, _: &[Node], _: &[Node]) -> bool {
        true
    }
}

impl<F: Fn(&[Node], &[Node]) -> bool + Sync> Containment for F {
    fn accepts(&self, root: &[Node], element: &[Node]) -> bool {
        self(root, element)
    }
}

/// A level set together with a root tuple.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Unit {
    pub level_set: Vec<usize>,
    pub root: Vec<Node>,
}

/// Hosts, the number of host levels in play, and the subtree height sought.
#[derive(Clone, Copy, Debug)]
pub struct SearchSpace<'a, H> {
    hosts: &'a [H],
    levels: usize,
    height: usize,
    top_level: Option<usize>,
}

impl<'a, H: Tree + Sync> SearchSpace<'a, H> {
    /// Subtrees of height `height` whose levels are all below `levels`.
    pub fn new(hosts: &'a [H], levels: usize, height: usize) -> Result<Self, TreeError> {
        if hosts.is_empty() {
            return Err(TreeError::EmptyBranchingVector);
        }
        for h in hosts {
            if let Some(hh) = h.height() {
                if levels > hh {
                    return Err(TreeError::LevelOutOfRange { level: levels - 1, height: hh });
                }
            }
        }
        Ok(SearchSpace { hosts, levels, height, top_level: None })
    }

    /// Restricts to subtrees whose highest level is `top`.
    pub fn with_top_level(mut self, top: usize) -> Self {
        self.top_level = Some(top);
        self
    }

    pub fn hosts(&self) -> &'a [H] {
        self.hosts
    }

    pub fn dim(&self) -> usize {
        self.hosts.len()
    }

    pub fn level_sets(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if self.height == 0 || self.height > self.levels {
            return out;
        }
        let mut current = Vec::with_capacity(self.height);
        self.level_sets_from(0, &mut current, &mut out);
        out
    }

    fn level_sets_from(&self, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == self.height {
            if self.top_level.is_none_or(|t| current.last() == Some(&t)) {
                out.push(current.clone());
            }
            return;
        }
        let remaining = self.height - current.len();
        let mut last_allowed = self.levels - remaining;
        if let Some(t) = self.top_level {
            // the top level is fixed, so lower levels stop early enough to leave room
            if t + 1 < remaining {
                return;
            }
            last_allowed = last_allowed.min(t + 1 - remaining);
        }
        for l in start..=last_allowed {
            current.push(l);
            self.level_sets_from(l + 1, current, out);
            current.pop();
        }
    }

    /// All units in search order.
    pub fn units(&self) -> Result<Vec<Unit>, TreeError> {
        let mut out = Vec::new();
        for level_set in self.level_sets() {
            let lists = self.hosts.iter().map(|h| h.level_nodes(level_set[0])).collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&[Node]> = lists.iter().map(Vec::as_slice).collect();
            for root in crate::subtree::product(&refs) {
                out.push(Unit { level_set: level_set.clone(), root });
            }
        }
        Ok(out)
    }

    /// Runs the backtracking inside one unit. `visit` is called on every
    /// accepted subtree and returns whether to continue.
    pub fn run_unit<C: Containment + ?Sized>(
        &self,
        unit: &Unit,
        containment: &C,
        budget: Budget<'_>,
        visit: &mut dyn FnMut(&VectorStrongSubtree) -> bool,
    ) -> UnitRun {
        let d = self.hosts.len();
        let mut dfs = Dfs {
            hosts: self.hosts,
            level_set: &unit.level_set,
            root: &unit.root,
            containment,
            chosen: (0..d).map(|i| alloc::vec![alloc::vec![unit.root[i].clone()]]).collect(),
            expansions: 0,
            budget,
            halt: Halt::No,
            visit,
        };
        dfs.expansions = 1;
        if budget.max_expansions == Some(0) {
            dfs.halt = Halt::Budget;
        } else if containment.accepts(&unit.root, &unit.root) {
            dfs.enter_slot_list(1, 0);
        }
        UnitRun { expansions: dfs.expansions, halt: dfs.halt }
    }

    /// Sequential search for the first accepted subtree.
    pub fn first<C: Containment + ?Sized>(&self, containment: &C, budget: Budget<'_>) -> Result<SearchOutcome, TreeError> {
        let units = self.units()?;
        let mut spent = 0u64;
        for unit in &units {
            let remaining = budget.max_expansions.map(|m| m.saturating_sub(spent));
            let unit_budget = Budget { max_expansions: remaining, stop: budget.stop };
            let mut found = None;
            let run = self.run_unit(unit, containment, unit_budget, &mut |s| {
                found = Some(s.clone());
                false
            });
            match run.halt {
                Halt::Budget | Halt::Stopped => {
                    return Ok(SearchOutcome::unknown(budget.max_expansions.unwrap_or(spent + run.expansions)))
                }
                Halt::Visitor => {
                    return Ok(SearchOutcome::witness(found.expect("visitor stored it"), spent + run.expansions))
                }
                Halt::No => spent += run.expansions,
            }
        }
        Ok(SearchOutcome::none(spent))
    }

    /// Calls `visit` on every accepted subtree in order; stops early when it returns `false`.
    pub fn for_each<C: Containment + ?Sized>(
        &self,
        containment: &C,
        budget: Budget<'_>,
        mut visit: impl FnMut(&VectorStrongSubtree) -> bool,
    ) -> Result<Completion, TreeError> {
        let mut spent = 0u64;
        for unit in self.units()? {
            let remaining = budget.max_expansions.map(|m| m.saturating_sub(spent));
            let run = self.run_unit(&unit, containment, Budget { max_expansions: remaining, stop: budget.stop }, &mut visit);
            spent += run.expansions;
            match run.halt {
                Halt::No => {}
                Halt::Visitor => return Ok(Completion { expansions: spent, complete: true }),
                Halt::Budget | Halt::Stopped => return Ok(Completion { expansions: spent, complete: false }),
            }
        }
        Ok(Completion { expansions: spent, complete: true })
    }
}

/// Why a unit run ended early, if it did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Halt {
    No,
    Visitor,
    Budget,
    Stopped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnitRun {
    pub expansions: u64,
    pub halt: Halt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Completion {
    pub expansions: u64,
    pub complete: bool,
}

/// The result of a unit that was searched for its first witness with its own expansion cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitResult {
    pub expansions: u64,
    pub halt: Halt,
    pub witness: Option<VectorStrongSubtree>,
}

/// Folds per-unit results (in unit order) into the outcome a sequential run
/// with the same total budget produces. Each unit must have been run with a
/// cap of at least the total budget.
pub fn merge_units(results: impl IntoIterator<Item = UnitResult>, max_expansions: Option<u64>) -> SearchOutcome {
    let mut spent = 0u64;
    for r in results {
        let remaining = max_expansions.map(|m| m.saturating_sub(spent));
        let over = remaining.is_some_and(|rem| r.expansions > rem);
        if over || matches!(r.halt, Halt::Budget | Halt::Stopped) {
            return SearchOutcome::unknown(max_expansions.unwrap_or(spent + r.expansions));
        }
        spent += r.expansions;
        if let Some(w) = r.witness {
            return SearchOutcome::witness(w, spent);
        }
    }
    SearchOutcome::none(spent)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Witness(VectorStrongSubtree),
    ExhaustedNone,
    Unknown,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expansions: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub outcome: Outcome,
    pub stats: SearchStats,
}

impl SearchOutcome {
    pub fn witness(w: VectorStrongSubtree, expansions: u64) -> Self {
        SearchOutcome { outcome: Outcome::Witness(w), stats: SearchStats { expansions } }
    }

    pub fn none(expansions: u64) -> Self {
        SearchOutcome { outcome: Outcome::ExhaustedNone, stats: SearchStats { expansions } }
    }

    pub fn unknown(expansions: u64) -> Self {
        SearchOutcome { outcome: Outcome::Unknown, stats: SearchStats { expansions } }
    }

    pub fn witness_ref(&self) -> Option<&VectorStrongSubtree> {
        match &self.outcome {
            Outcome::Witness(w) => Some(w),
            _ => None,
        }
    }

    pub fn status_word(&self) -> &'static str {
        match self.outcome {
            Outcome::Witness(_) => "witness",
            Outcome::ExhaustedNone => "certified-none",
            Outcome::Unknown => "unknown",
        }
    }
}

struct Dfs<'a, 'v, H, C: ?Sized> {
    hosts: &'a [H],
    level_set: &'a [usize],
    root: &'a [Node],
    containment: &'a C,
    /// `chosen[i][j]` is the node list of coordinate `i` at subtree level `j`.
    chosen: Vec<Vec<Vec<Node>>>,
    expansions: u64,
    budget: Budget<'a>,
    halt: Halt,
    visit: &'v mut dyn FnMut(&VectorStrongSubtree) -> bool,
}

impl<H: Tree, C: Containment + ?Sized> Dfs<'_, '_, H, C> {
    /// Starts filling level `j` of coordinate `i`.
    fn enter_slot_list(&mut self, j: usize, i: usize) {
        if j == self.level_set.len() {
            self.emit();
            return;
        }
        let host = &self.hosts[i];
        let mut cone_tops = Vec::new();
        for t in &self.chosen[i][j - 1] {
            let b = host.branching_at(t).unwrap_or(0);
            cone_tops.extend((0..b).map(|p| t.child(p)));
        }
        self.chosen[i].push(Vec::with_capacity(cone_tops.len()));
        self.fill(j, i, &cone_tops, 0);
        self.chosen[i].pop();
    }

    fn fill(&mut self, j: usize, i: usize, cone_tops: &[Node], slot: usize) {
        if slot == cone_tops.len() {
            if i + 1 == self.hosts.len() {
                self.enter_slot_list(j + 1, 0);
            } else {
                self.enter_slot_list(j, i + 1);
            }
            return;
        }
        let Ok(candidates) = self.hosts[i].successors_in_level(&cone_tops[slot], self.level_set[j]) else {
            return;
        };
        for x in candidates {
            if self.halt != Halt::No {
                return;
            }
            self.expansions += 1;
            if self.budget.max_expansions.is_some_and(|m| self.expansions > m) {
                self.halt = Halt::Budget;
                return;
            }
            if self.expansions.is_multiple_of(STOP_POLL_INTERVAL) && self.budget.stopped() {
                self.halt = Halt::Stopped;
                return;
            }
            if i + 1 == self.hosts.len() && !self.completes_accepted(j, &x) {
                continue;
            }
            self.chosen[i][j].push(x);
            self.fill(j, i, cone_tops, slot + 1);
            self.chosen[i][j].pop();
        }
    }

    /// Checks every level-`j` element whose last coordinate is `x`.
    fn completes_accepted(&self, j: usize, x: &Node) -> bool {
        let d = self.hosts.len();
        let others: Vec<&[Node]> = (0..d - 1).map(|i| self.chosen[i][j].as_slice()).collect();
        let mut element: Vec<Node> = Vec::with_capacity(d);
        self.all_with_last(&others, x, &mut element)
    }

    fn all_with_last(&self, others: &[&[Node]], x: &Node, element: &mut Vec<Node>) -> bool {
        if element.len() == others.len() {
            element.push(x.clone());
            let ok = self.containment.accepts(self.root, element);
            element.pop();
            return ok;
        }
        for t in others[element.len()] {
            element.push(t.clone());
            let ok = self.all_with_last(others, x, element);
            element.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    fn emit(&mut self) {
        let coords = self
            .chosen
            .iter()
            .map(|levels| StrongSubtree::new(self.level_set.to_vec(), levels.clone()))
            .collect();
        let s = VectorStrongSubtree::new(coords).expect("shared level set");
        if !(self.visit)(&s) {
            self.halt = Halt::Visitor;
        }
    }
}

/// Every vector strong subtree of height `k` with all levels below `n`, in search order.
pub fn enumerate_strong<H: Tree + Sync>(
    hosts: &[H],
    n: usize,
    k: usize,
    budget: Budget<'_>,
) -> Result<Result<Vec<VectorStrongSubtree>, BudgetExceeded>, TreeError> {
    let space = SearchSpace::new(hosts, n, k)?;
    let mut out = Vec::new();
    let done = space.for_each(&AcceptAll, budget, |s| {
        out.push(s.clone());
        true
    })?;
    Ok(if done.complete { Ok(out) } else { Err(BudgetExceeded { expansions: done.expansions, produced: out.len() }) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetExceeded {
    pub expansions: u64,
    pub produced: usize,
}

impl fmt::Display for BudgetExceeded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "budget exhausted after {} expansions ({} results so far)", self.expansions, self.produced)
    }
}

impl core::error::Error for BudgetExceeded {}
