//! Exact weighted set cover.
//!
//! Candidates are 0-1 selection variables with nonnegative costs; every
//! point must be covered at least once. [`solve_bnb`] first shrinks the
//! instance with reductions that keep at least one optimum (dominated
//! candidates, dominated points, forced candidates). It then runs a
//! depth-first branch-and-bound seeded by the greedy cover.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One selectable set. Points are indices in `0..n_points`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverCandidate {
    pub id: usize,
    pub points: FixedBitSet,
    pub cost: f64,
}

impl CoverCandidate {
    pub fn new(id: usize, n_points: usize, points: &[usize], cost: f64) -> Self {
        let mut bits = FixedBitSet::with_capacity(n_points);
        for &p in points {
            bits.insert(p);
        }
        CoverCandidate {
            id,
            points: bits,
            cost,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetCoverInstance {
    pub n_points: usize,
    pub candidates: Vec<CoverCandidate>,
}

#[derive(Serialize, Deserialize)]
struct CandidateJson {
    id: usize,
    points: Vec<usize>,
    cost: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    n_points: usize,
    candidates: Vec<CandidateJson>,
}

impl Serialize for SetCoverInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        InstanceJson {
            n_points: self.n_points,
            candidates: self
                .candidates
                .iter()
                .map(|c| CandidateJson {
                    id: c.id,
                    points: c.points.ones().collect(),
                    cost: c.cost,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SetCoverInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = InstanceJson::deserialize(d)?;
        let mut candidates = Vec::with_capacity(raw.candidates.len());
        for c in raw.candidates {
            if let Some(&p) = c.points.iter().find(|&&p| p >= raw.n_points) {
                return Err(serde::de::Error::custom(format!(
                    "candidate {} covers point {p} outside 0..{}",
                    c.id, raw.n_points
                )));
            }
            candidates.push(CoverCandidate::new(c.id, raw.n_points, &c.points, c.cost));
        }
        Ok(SetCoverInstance {
            n_points: raw.n_points,
            candidates,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverSolution {
    /// Selected candidate ids, ascending.
    pub selected: Vec<usize>,
    pub total_cost: f64,
    pub proven_optimal: bool,
    /// Branch-and-bound nodes visited.
    pub iterations: u64,
    #[serde(rename = "solve_time_s")]
    pub solve_time: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum CoverError {
    #[error("point {point} is not covered by any candidate")]
    InfeasibleInstance { point: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("time limit reached; best cover costs {:.6}", .0.total_cost)]
    TimeLimit(Box<CoverSolution>),
}

impl SetCoverInstance {
    pub fn new(n_points: usize, candidates: Vec<CoverCandidate>) -> Self {
        SetCoverInstance {
            n_points,
            candidates,
        }
    }

    fn validate(&self) -> Result<(), CoverError> {
        for c in &self.candidates {
            if !(c.cost >= 0.0 && c.cost.is_finite()) {
                return Err(CoverError::InvalidInstance(format!(
                    "candidate {} has cost {}",
                    c.id, c.cost
                )));
            }
            if c.points.len() != self.n_points {
                return Err(CoverError::InvalidInstance(format!(
                    "candidate {} bitset has length {} instead of {}",
                    c.id,
                    c.points.len(),
                    self.n_points
                )));
            }
        }
        let mut ids: Vec<usize> = self.candidates.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(CoverError::InvalidInstance("duplicate candidate id".into()));
        }
        Ok(())
    }

    fn first_uncoverable(&self) -> Option<usize> {
        let mut all = FixedBitSet::with_capacity(self.n_points);
        for c in &self.candidates {
            all.union_with(&c.points);
        }
        all.zeroes().next()
    }

    fn sorted_by_id(&self) -> Vec<&CoverCandidate> {
        let mut v: Vec<&CoverCandidate> = self.candidates.iter().collect();
        v.sort_by_key(|c| c.id);
        v
    }

    fn cost_of(&self, ids: &[usize]) -> f64 {
        let mut sorted = ids.to_vec();
        sorted.sort_unstable();
        sorted
            .iter()
            .map(|id| {
                self.candidates
                    .iter()
                    .find(|c| c.id == *id)
                    .map_or(f64::NAN, |c| c.cost)
            })
            .sum()
    }
}

/// Sum of costs in ascending id order, so equal selections give equal sums.
fn total_cost(costs_by_id: &mut [(usize, f64)]) -> f64 {
    costs_by_id.sort_unstable_by_key(|&(id, _)| id);
    costs_by_id.iter().map(|&(_, c)| c).sum()
}

/// Repeatedly takes the candidate with the lowest cost per newly covered
/// point (ties to the lower id) until everything is covered.
pub fn greedy_cover(inst: &SetCoverInstance) -> Result<CoverSolution, CoverError> {
    let started = Instant::now();
    inst.validate()?;
    if let Some(point) = inst.first_uncoverable() {
        return Err(CoverError::InfeasibleInstance { point });
    }
    let cands = inst.sorted_by_id();
    let (sets, costs) = split(&cands);
    let picked = greedy_indices(&sets, &costs, inst.n_points);
    let mut chosen: Vec<(usize, f64)> = picked.iter().map(|&i| (cands[i].id, cands[i].cost)).collect();
    let total = total_cost(&mut chosen);
    Ok(CoverSolution {
        selected: chosen.iter().map(|&(id, _)| id).collect(),
        total_cost: total,
        proven_optimal: false,
        iterations: 0,
        solve_time: started.elapsed().as_secs_f64(),
    })
}

fn split<'a>(cands: &[&'a CoverCandidate]) -> (Vec<&'a FixedBitSet>, Vec<f64>) {
    (cands.iter().map(|c| &c.points).collect(), cands.iter().map(|c| c.cost).collect())
}

fn greedy_indices(sets: &[&FixedBitSet], costs: &[f64], n_points: usize) -> Vec<usize> {
    let mut uncovered = FixedBitSet::with_capacity(n_points);
    uncovered.insert_range(..);
    let mut picked = Vec::new();
    while !uncovered.is_clear() {
        let mut best: Option<(f64, usize)> = None;
        for (i, set) in sets.iter().enumerate() {
            let gain = set.intersection_count(&uncovered);
            if gain == 0 {
                continue;
            }
            let ratio = costs[i] / gain as f64;
            if best.is_none_or(|(r, _)| ratio < r) {
                best = Some((ratio, i));
            }
        }
        let Some((_, i)) = best else { break };
        uncovered.difference_with(sets[i]);
        picked.push(i);
    }
    picked
}

/// True iff the selection covers every point and its cost matches
/// `sol.total_cost` within 1e-9.
pub fn verify_cover(inst: &SetCoverInstance, sol: &CoverSolution) -> bool {
    let mut covered = FixedBitSet::with_capacity(inst.n_points);
    for id in &sol.selected {
        match inst.candidates.iter().find(|c| c.id == *id) {
            Some(c) => covered.union_with(&c.points),
            None => return false,
        }
    }
    let cost = inst.cost_of(&sol.selected);
    covered.count_ones(..) == inst.n_points && (cost - sol.total_cost).abs() <= 1e-9
}

/// Reduced problem: candidate `i` refers to `orig[i]` of the id-sorted list,
/// with point sets re-indexed onto the surviving points.
struct Reduced {
    orig: Vec<usize>,
    sets: Vec<FixedBitSet>,
    costs: Vec<f64>,
    n_points: usize,
    forced: Vec<usize>,
}

struct Clock {
    started: Instant,
    limit: Duration,
}

impl Clock {
    fn expired(&self) -> bool {
        self.started.elapsed() >= self.limit
    }
}

/// Drops candidates whose point set is contained in that of a candidate
/// ranked earlier (lower cost, then larger set, then lower position).
fn drop_dominated_candidates(
    idx: &mut Vec<usize>,
    sets: &[FixedBitSet],
    costs: &[f64],
    n_points: usize,
    clock: &Clock,
) -> bool {
    idx.retain(|&i| !sets[i].is_clear());
    let mut order = idx.clone();
    order.sort_by(|&a, &b| {
        costs[a]
            .partial_cmp(&costs[b])
            .unwrap_or(Ordering::Equal)
            .then_with(|| sets[b].count_ones(..).cmp(&sets[a].count_ones(..)))
            .then_with(|| a.cmp(&b))
    });
    let mut by_point: Vec<Vec<usize>> = vec![Vec::new(); n_points];
    let mut kept = Vec::with_capacity(order.len());
    for (k, &c) in order.iter().enumerate() {
        if k % 512 == 0 && clock.expired() {
            return false;
        }
        let pivot = sets[c]
            .ones()
            .min_by_key(|&p| by_point[p].len())
            .expect("nonempty set");
        let dominated = by_point[pivot].iter().any(|&o| sets[c].is_subset(&sets[o]));
        if !dominated {
            for p in sets[c].ones() {
                by_point[p].push(c);
            }
            kept.push(c);
        }
    }
    kept.sort_unstable();
    *idx = kept;
    true
}

/// Drops points whose covering candidates include all candidates of some
/// other point; covering that other point covers this one too.
fn drop_dominated_points(live_points: &mut Vec<usize>, by_point: &[FixedBitSet], clock: &Clock) -> bool {
    let mut order = live_points.clone();
    order.sort_by_key(|&p| (by_point[p].count_ones(..), p));
    let mut kept: Vec<usize> = Vec::with_capacity(order.len());
    for (k, &p) in order.iter().enumerate() {
        if k % 64 == 0 && clock.expired() {
            return false;
        }
        if !kept.iter().any(|&q| by_point[q].is_subset(&by_point[p])) {
            kept.push(p);
        }
    }
    kept.sort_unstable();
    *live_points = kept;
    true
}

fn reduce(cands: &[&CoverCandidate], n_points: usize, clock: &Clock) -> Option<Reduced> {
    let mut sets: Vec<FixedBitSet> = cands.iter().map(|c| c.points.clone()).collect();
    let costs: Vec<f64> = cands.iter().map(|c| c.cost).collect();
    let mut live: Vec<usize> = (0..cands.len()).collect();
    let mut points: Vec<usize> = (0..n_points).collect();
    let mut forced: Vec<usize> = Vec::new();
    let mut width = n_points;

    loop {
        let before = (live.len(), points.len(), forced.len());
        if !drop_dominated_candidates(&mut live, &sets, &costs, width, clock) {
            return None;
        }

        // Point → live-candidate incidence, indexed by position in `live`.
        let mut by_point: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(live.len()); width];
        for (j, &c) in live.iter().enumerate() {
            for p in sets[c].ones() {
                by_point[p].insert(j);
            }
        }

        // A point with a single candidate forces that candidate.
        let mut covered_by_forced = FixedBitSet::with_capacity(width);
        let mut newly_forced: Vec<usize> = Vec::new();
        for cands in by_point.iter().take(width) {
            if cands.count_ones(..) == 1 {
                let j = cands.ones().next().expect("one candidate");
                if !newly_forced.contains(&live[j]) {
                    newly_forced.push(live[j]);
                    covered_by_forced.union_with(&sets[live[j]]);
                }
            }
        }
        newly_forced.sort_unstable();
        forced.extend(&newly_forced);

        let mut remaining: Vec<usize> = (0..width).filter(|&p| !covered_by_forced.contains(p)).collect();
        if !drop_dominated_points(&mut remaining, &by_point, clock) {
            return None;
        }

        // Re-index surviving points and shrink candidate sets onto them.
        let mut remap = vec![usize::MAX; width];
        for (new, &old) in remaining.iter().enumerate() {
            remap[old] = new;
        }
        let new_width = remaining.len();
        for &c in &live {
            let mut shrunk = FixedBitSet::with_capacity(new_width);
            for p in sets[c].ones() {
                if remap[p] != usize::MAX {
                    shrunk.insert(remap[p]);
                }
            }
            sets[c] = shrunk;
        }
        live.retain(|c| !newly_forced.contains(c));
        width = new_width;
        points = remaining;

        if (live.len(), points.len(), forced.len()) == before || width == 0 {
            break;
        }
    }
    if width > 0 {
        // Final pass so the B&B never sees dominated or empty candidates.
        if !drop_dominated_candidates(&mut live, &sets, &costs, width, clock) {
            return None;
        }
    } else {
        live.clear();
    }

    Some(Reduced {
        sets: live.iter().map(|&c| sets[c].clone()).collect(),
        costs: live.iter().map(|&c| costs[c]).collect(),
        orig: live,
        n_points: width,
        forced,
    })
}

struct Search<'a> {
    sets: &'a [FixedBitSet],
    costs: &'a [f64],
    by_point: Vec<Vec<usize>>,
    best_cost: f64,
    best: Option<Vec<usize>>,
    chosen: Vec<usize>,
    excluded: Vec<bool>,
    nodes: u64,
    clock: &'a Clock,
    timed_out: bool,
}

impl Search<'_> {
    fn prune_threshold(&self) -> f64 {
        self.best_cost - 1e-9 * self.best_cost.abs().max(1.0)
    }

    fn dfs(&mut self, uncovered: &FixedBitSet, cost: f64) {
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) && self.clock.expired() {
            self.timed_out = true;
        }
        if self.timed_out {
            return;
        }
        if uncovered.is_clear() {
            if cost < self.prune_threshold() {
                self.best_cost = cost;
                self.best = Some(self.chosen.clone());
            }
            return;
        }

        // Each uncovered point is charged the best cost per newly covered
        // point among its available candidates; the sum bounds any completion.
        let gains: Vec<usize> = self
            .sets
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if self.excluded[c] {
                    0
                } else {
                    s.intersection_count(uncovered)
                }
            })
            .collect();
        let mut bound = cost;
        let mut branch_point: Option<(usize, usize)> = None;
        for p in uncovered.ones() {
            let mut min_ratio = f64::INFINITY;
            let mut options = 0;
            for &c in &self.by_point[p] {
                if gains[c] > 0 {
                    options += 1;
                    min_ratio = min_ratio.min(self.costs[c] / gains[c] as f64);
                }
            }
            if options == 0 {
                return;
            }
            bound += min_ratio;
            if branch_point.is_none_or(|(_, o)| options < o) {
                branch_point = Some((p, options));
            }
        }
        if bound >= self.prune_threshold() {
            return;
        }

        let (p, _) = branch_point.expect("uncovered point");
        let mut options: Vec<usize> = self.by_point[p].iter().copied().filter(|&c| gains[c] > 0).collect();
        options.sort_by(|&a, &b| {
            let ra = self.costs[a] / gains[a] as f64;
            let rb = self.costs[b] / gains[b] as f64;
            ra.partial_cmp(&rb).unwrap_or(Ordering::Equal).then(a.cmp(&b))
        });
        let mut newly_excluded = Vec::with_capacity(options.len());
        for c in options {
            if cost + self.costs[c] < self.prune_threshold() {
                let mut next = uncovered.clone();
                next.difference_with(&self.sets[c]);
                self.chosen.push(c);
                self.dfs(&next, cost + self.costs[c]);
                self.chosen.pop();
                if self.timed_out {
                    break;
                }
            }
            self.excluded[c] = true;
            newly_excluded.push(c);
        }
        for c in newly_excluded {
            self.excluded[c] = false;
        }
    }
}

/// Minimum-cost cover by branch-and-bound.
///
/// Returns a proven optimum, or [`CoverError::TimeLimit`] carrying the best
/// cover found when `time_limit` runs out. The greedy cover is always
/// available as a fallback incumbent.
pub fn solve_bnb(inst: &SetCoverInstance, time_limit: Duration) -> Result<CoverSolution, CoverError> {
    let started = Instant::now();
    let clock = Clock {
        started,
        limit: time_limit,
    };
    inst.validate()?;
    if let Some(point) = inst.first_uncoverable() {
        return Err(CoverError::InfeasibleInstance { point });
    }
    let cands = inst.sorted_by_id();

    let (sets, costs) = split(&cands);
    let greedy = greedy_indices(&sets, &costs, inst.n_points);
    let mut incumbent = prune_redundant(&cands, inst.n_points, greedy);
    let mut incumbent_cost = selection_cost(&cands, &incumbent);

    let finish = |picked: &[usize], proven: bool, iterations: u64| {
        let mut chosen: Vec<(usize, f64)> = picked.iter().map(|&i| (cands[i].id, cands[i].cost)).collect();
        let total = total_cost(&mut chosen);
        CoverSolution {
            selected: chosen.iter().map(|&(id, _)| id).collect(),
            total_cost: total,
            proven_optimal: proven,
            iterations,
            solve_time: started.elapsed().as_secs_f64(),
        }
    };

    let Some(red) = reduce(&cands, inst.n_points, &clock) else {
        return Err(CoverError::TimeLimit(Box::new(finish(&incumbent, false, 0))));
    };
    let forced_cost: f64 = red.forced.iter().map(|&i| cands[i].cost).sum();

    // Greedy on the reduced problem often beats greedy on the full one.
    if red.n_points > 0 {
        let local_sets: Vec<&FixedBitSet> = red.sets.iter().collect();
        let local = greedy_indices(&local_sets, &red.costs, red.n_points);
        let mut picked: Vec<usize> = red.forced.clone();
        picked.extend(local.iter().map(|&j| red.orig[j]));
        let picked = prune_redundant(&cands, inst.n_points, picked);
        let cost = selection_cost(&cands, &picked);
        if cost < incumbent_cost {
            incumbent = picked;
            incumbent_cost = cost;
        }
    } else {
        let cost = selection_cost(&cands, &red.forced);
        if cost < incumbent_cost {
            incumbent = red.forced.clone();
            incumbent_cost = cost;
        }
    }

    let mut by_point: Vec<Vec<usize>> = vec![Vec::new(); red.n_points];
    for (c, s) in red.sets.iter().enumerate() {
        for p in s.ones() {
            by_point[p].push(c);
        }
    }
    let mut search = Search {
        sets: &red.sets,
        costs: &red.costs,
        by_point,
        best_cost: incumbent_cost - forced_cost,
        best: None,
        chosen: Vec::new(),
        excluded: vec![false; red.sets.len()],
        nodes: 0,
        clock: &clock,
        timed_out: false,
    };
    let mut all = FixedBitSet::with_capacity(red.n_points);
    all.insert_range(..);
    search.dfs(&all, 0.0);

    if let Some(best) = &search.best {
        let mut picked = red.forced.clone();
        picked.extend(best.iter().map(|&j| red.orig[j]));
        incumbent = picked;
    }
    let sol = finish(&incumbent, !search.timed_out, search.nodes);
    if search.timed_out {
        Err(CoverError::TimeLimit(Box::new(sol)))
    } else {
        Ok(sol)
    }
}

fn selection_cost(cands: &[&CoverCandidate], picked: &[usize]) -> f64 {
    let mut chosen: Vec<(usize, f64)> = picked.iter().map(|&i| (cands[i].id, cands[i].cost)).collect();
    total_cost(&mut chosen)
}

/// Removes selected candidates that are not needed, most expensive first.
fn prune_redundant(cands: &[&CoverCandidate], n_points: usize, mut picked: Vec<usize>) -> Vec<usize> {
    picked.sort_by(|&a, &b| {
        cands[b]
            .cost
            .partial_cmp(&cands[a].cost)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut k = 0;
    while k < picked.len() {
        let mut others = FixedBitSet::with_capacity(n_points);
        for (m, &i) in picked.iter().enumerate() {
            if m != k {
                others.union_with(&cands[i].points);
            }
        }
        if others.count_ones(..) == n_points {
            picked.remove(k);
        } else {
            k += 1;
        }
    }
    picked.sort_unstable();
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LIMIT: Duration = Duration::from_secs(30);

    fn inst(n: usize, sets: &[(&[usize], f64)]) -> SetCoverInstance {
        SetCoverInstance::new(
            n,
            sets.iter()
                .enumerate()
                .map(|(id, (pts, cost))| CoverCandidate::new(id, n, pts, *cost))
                .collect(),
        )
    }

    /// Exhaustive optimum over all subsets.
    fn brute_force(inst: &SetCoverInstance) -> Option<f64> {
        let m = inst.candidates.len();
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << m) {
            let mut covered = FixedBitSet::with_capacity(inst.n_points);
            let mut costs: Vec<(usize, f64)> = Vec::new();
            for (i, c) in inst.candidates.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    covered.union_with(&c.points);
                    costs.push((c.id, c.cost));
                }
            }
            if covered.count_ones(..) == inst.n_points {
                let cost = total_cost(&mut costs);
                if best.is_none_or(|b| cost < b) {
                    best = Some(cost);
                }
            }
        }
        best
    }

    fn example_one() -> SetCoverInstance {
        inst(3, &[(&[0, 1], 10.5), (&[1, 2], 10.2), (&[0, 1, 2], 10.9)])
    }

    fn example_three() -> SetCoverInstance {
        inst(2, &[(&[0], 1.0), (&[1], 1.0), (&[0, 1], 2.1)])
    }

    fn greedy_trap() -> SetCoverInstance {
        inst(4, &[(&[0, 1], 1.0), (&[2, 3], 1.0), (&[0, 1, 2], 1.4), (&[3], 0.2)])
    }

    #[test]
    fn greedy_examples() {
        let g = greedy_cover(&example_one()).unwrap();
        assert_eq!(g.selected, vec![2]);
        assert_eq!(g.total_cost, 10.9);
        assert!(!g.proven_optimal);

        let single = inst(3, &[(&[0, 1, 2], 4.0)]);
        assert_eq!(greedy_cover(&single).unwrap().selected, vec![0]);

        let g = greedy_cover(&example_three()).unwrap();
        assert_eq!(g.selected, vec![0, 1]);
        assert_eq!(g.total_cost, 2.0);
    }

    #[test]
    fn bnb_examples_match_brute_force() {
        for (instance, expected_sel) in [
            (example_one(), vec![2]),
            (example_three(), vec![0, 1]),
            (greedy_trap(), vec![2, 3]),
        ] {
            let optimum = brute_force(&instance).unwrap();
            let sol = solve_bnb(&instance, LIMIT).unwrap();
            assert!(sol.proven_optimal);
            assert_eq!(sol.total_cost, optimum);
            assert_eq!(sol.selected, expected_sel);
            assert!(verify_cover(&instance, &sol));
        }
        // {A, B} costs 2.0 but {C, D} covers everything for 1.6.
        assert!((brute_force(&greedy_trap()).unwrap() - 1.6).abs() < 1e-12);
        let g = greedy_cover(&greedy_trap()).unwrap();
        assert_eq!(g.selected, vec![2, 3]);
    }

    #[test]
    fn infeasible_instance_is_reported() {
        let bad = inst(3, &[(&[0], 1.0), (&[1], 1.0)]);
        assert_eq!(greedy_cover(&bad), Err(CoverError::InfeasibleInstance { point: 2 }));
        assert_eq!(solve_bnb(&bad, LIMIT), Err(CoverError::InfeasibleInstance { point: 2 }));
    }

    #[test]
    fn invalid_costs_rejected() {
        let bad = inst(1, &[(&[0], -1.0)]);
        assert!(matches!(solve_bnb(&bad, LIMIT), Err(CoverError::InvalidInstance(_))));
    }

    #[test]
    fn verify_examples() {
        let i = example_one();
        let ok = CoverSolution {
            selected: vec![2],
            total_cost: 10.9,
            proven_optimal: true,
            iterations: 0,
            solve_time: 0.0,
        };
        assert!(verify_cover(&i, &ok));
        let missing = CoverSolution {
            selected: vec![0],
            total_cost: 10.5,
            ..ok.clone()
        };
        assert!(!verify_cover(&i, &missing));
        let empty = CoverSolution {
            selected: vec![],
            total_cost: 0.0,
            ..ok.clone()
        };
        assert!(!verify_cover(&i, &empty));
        let wrong_cost = CoverSolution {
            total_cost: 11.0,
            ..ok
        };
        assert!(!verify_cover(&i, &wrong_cost));
    }

    #[test]
    fn zero_time_limit_returns_greedy_incumbent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let big = random_instance(&mut rng, 60, 200);
        match solve_bnb(&big, Duration::ZERO) {
            Err(CoverError::TimeLimit(sol)) => {
                assert!(!sol.proven_optimal);
                assert!(verify_cover(&big, &sol));
            }
            other => panic!("expected time limit, got {other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let i = greedy_trap();
        let json = serde_json::to_string(&i).unwrap();
        assert!(json.starts_with(r#"{"n_points":4,"candidates":[{"id":0,"points":[0,1],"cost":1.0}"#));
        let back: SetCoverInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back, i);
        assert!(serde_json::from_str::<SetCoverInstance>(
            r#"{"n_points":1,"candidates":[{"id":0,"points":[3],"cost":1}]}"#
        )
        .is_err());
    }

    fn random_instance(rng: &mut ChaCha8Rng, n_cands: usize, n_points: usize) -> SetCoverInstance {
        let mut candidates = Vec::with_capacity(n_cands);
        for id in 0..n_cands {
            let density = rng.gen_range(0.05..0.5);
            let pts: Vec<usize> = (0..n_points).filter(|_| rng.gen_bool(density)).collect();
            candidates.push(CoverCandidate::new(id, n_points, &pts, rng.gen_range(0.5..10.0)));
        }
        // Guarantee feasibility with one expensive full candidate.
        let all: Vec<usize> = (0..n_points).collect();
        candidates.push(CoverCandidate::new(n_cands, n_points, &all, 1000.0));
        SetCoverInstance::new(n_points, candidates)
    }

    #[test]
    fn larger_instance_beats_or_matches_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let i = random_instance(&mut rng, 60, 120);
        let g = greedy_cover(&i).unwrap();
        let b = solve_bnb(&i, LIMIT).unwrap();
        assert!(b.proven_optimal);
        assert!(b.total_cost <= g.total_cost);
        assert!(verify_cover(&i, &b));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn bnb_equals_enumeration(seed in 0u64..10_000, m in 1usize..18, n in 1usize..25) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut i = random_instance(&mut rng, m, n);
            // Drop the safety candidate sometimes to exercise infeasibility.
            if seed % 5 == 0 {
                i.candidates.pop();
            }
            match brute_force(&i) {
                None => {
                    let infeasible = matches!(solve_bnb(&i, LIMIT), Err(CoverError::InfeasibleInstance { .. }));
                    prop_assert!(infeasible);
                }
                Some(opt) => {
                    let sol = solve_bnb(&i, LIMIT).unwrap();
                    prop_assert_eq!(sol.total_cost, opt);
                    prop_assert!(verify_cover(&i, &sol));
                    let g = greedy_cover(&i).unwrap();
                    prop_assert!(g.total_cost >= sol.total_cost);
                    prop_assert!(verify_cover(&i, &g));
                }
            }
        }

        #[test]
        fn bnb_ignores_input_order(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let i = random_instance(&mut rng, 10, 15);
            let mut shuffled = i.clone();
            shuffled.candidates.reverse();
            let a = solve_bnb(&i, LIMIT).unwrap();
            let b = solve_bnb(&shuffled, LIMIT).unwrap();
            prop_assert_eq!(a.selected, b.selected);
            prop_assert_eq!(a.total_cost, b.total_cost);
        }
    }
}
