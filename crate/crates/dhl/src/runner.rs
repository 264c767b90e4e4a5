//! Multi-threaded first-witness search over the units of a search space.
//!
//! Units are handed out in order from a shared counter. Each unit runs with the
//! full expansion cap, and the per-unit results are folded in unit order with
//! [`merge_units`], so the outcome and the reported expansion count equal those
//! of a sequential run whatever the thread count. Only a wall-clock stop can
//! make runs differ.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use dhl_core::enumerate::{merge_units, Halt, SearchSpace, UnitResult};
use dhl_core::{Budget, Containment, SearchOutcome, Tree, TreeError};

pub fn first_witness<H, C>(space: &SearchSpace<'_, H>, containment: &C, budget: Budget<'_>, threads: usize) -> Result<SearchOutcome, TreeError>
where
    H: Tree + Sync,
    C: Containment + Sync + ?Sized,
{
    if threads <= 1 {
        return space.first(containment, budget);
    }
    let units = space.units()?;
    let results: Vec<Mutex<Option<UnitResult>>> = units.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    // Smallest unit index known to end the fold (a witness or an exhausted cap).
    let cutoff = AtomicUsize::new(usize::MAX);
    std::thread::scope(|scope| {
        for _ in 0..threads.min(units.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= units.len() || i > cutoff.load(Ordering::Relaxed) {
                    break;
                }
                let mut witness = None;
                let run = space.run_unit(&units[i], containment, budget, &mut |s| {
                    witness = Some(s.clone());
                    false
                });
                if witness.is_some() || run.halt != Halt::No {
                    cutoff.fetch_min(i, Ordering::Relaxed);
                }
                *results[i].lock().expect("unit result lock") = Some(UnitResult { expansions: run.expansions, halt: run.halt, witness });
            });
        }
    });
    // Every unit below the cutoff was claimed before it and has finished.
    let ordered = results.into_iter().map_while(|m| m.into_inner().expect("unit result lock"));
    Ok(merge_units(ordered, budget.max_expansions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dhl_core::product::ProductSubset;
    use dhl_core::BranchingVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn threads_agree_with_sequential() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let b = BranchingVector::new(vec![2, 2]).unwrap();
            let d = ProductSubset::from_fn(b.clone(), 4, |_, _| rng.gen_bool(0.8)).unwrap();
            let hosts = b.hosts(4);
            let space = SearchSpace::new(&hosts, 4, 3).unwrap();
            for cap in [None, Some(50), Some(5000)] {
                let budget = Budget { max_expansions: cap, stop: None };
                let seq = space.first(&d, budget).unwrap();
                for t in [2, 3, 8] {
                    assert_eq!(first_witness(&space, &d, budget, t).unwrap(), seq);
                }
            }
        }
    }
}
