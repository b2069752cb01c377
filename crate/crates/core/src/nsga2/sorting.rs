use std::cmp::Ordering;

use super::Nsga2Error;

/// `a` dominates `b` under minimization.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool, Nsga2Error> {
    if a.len() != b.len() {
        return Err(Nsga2Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(dominates_unchecked(a, b))
}

#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

fn validate<O: AsRef<[f64]>>(objectives: &[O]) -> Result<(), Nsga2Error> {
    let Some(first) = objectives.first() else { return Ok(()) };
    let m = first.as_ref().len();
    for (i, o) in objectives.iter().enumerate() {
        let o = o.as_ref();
        if o.len() != m {
            return Err(Nsga2Error::LengthMismatch(m, o.len()));
        }
        if o.is_empty() || o.iter().any(|v| !v.is_finite()) {
            return Err(Nsga2Error::NotEvaluated(i));
        }
    }
    Ok(())
}

/// Fronts of indices, best first; each front is sorted ascending.
///
/// `O(M N²)` comparisons and `O(N²)` storage for the domination lists.
pub fn fast_nondominated_sort<O: AsRef<[f64]>>(objectives: &[O]) -> Result<Vec<Vec<usize>>, Nsga2Error> {
    validate(objectives)?;
    let n = objectives.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in p + 1..n {
            let (a, b) = (objectives[p].as_ref(), objectives[q].as_ref());
            if dominates_unchecked(a, b) {
                dominated_by_me[p].push(q);
                domination_count[q] += 1;
            } else if dominates_unchecked(b, a) {
                dominated_by_me[q].push(p);
                domination_count[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by_me[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    Ok(fronts)
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Crowding distance of each member of one front.
///
/// Per objective the front is sorted; both ends get `+∞` and each interior
/// member accumulates `(f[i+1] − f[i−1]) / (max f − min f)`. An objective
/// with zero spread contributes nothing.
pub fn crowding_distance<O: AsRef<[f64]>>(front: &[O]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].as_ref().len();
    let mut distance = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for obj in 0..m {
        let value = |i: usize| front[i].as_ref()[obj];
        order.sort_by(|&a, &b| {
            value(a)
                .total_cmp(&value(b))
                .then_with(|| lexicographic(front[a].as_ref(), front[b].as_ref()))
                .then(a.cmp(&b))
        });
        let (first, last) = (order[0], order[n - 1]);
        distance[first] = f64::INFINITY;
        distance[last] = f64::INFINITY;
        let range = value(last) - value(first);
        if range > 0.0 {
            for k in 1..n - 1 {
                distance[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / range;
            }
        }
    }
    distance
}

/// Ranks (1-based) and crowding distances for a whole population.
pub fn assign_rank_and_crowding<O: AsRef<[f64]>>(objectives: &[O]) -> Result<(Vec<usize>, Vec<f64>), Nsga2Error> {
    let fronts = fast_nondominated_sort(objectives)?;
    let n = objectives.len();
    let mut rank = vec![0; n];
    let mut crowding = vec![0.0; n];
    for (r, front) in fronts.iter().enumerate() {
        let members: Vec<&[f64]> = front.iter().map(|&i| objectives[i].as_ref()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&members)) {
            rank[i] = r + 1;
            crowding[i] = d;
        }
    }
    Ok((rank, crowding))
}
