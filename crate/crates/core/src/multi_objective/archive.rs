use super::indicators::Point;

/// Every evaluated objective vector, plus the non-dominated subset kept up
/// to date on insertion.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoArchive {
    reference: Point,
    points: Vec<Point>,
    front: Vec<Point>,
    volume: f64,
}

impl ParetoArchive {
    pub fn new(reference: Point) -> Self {
        ParetoArchive {
            reference,
            points: Vec::new(),
            front: Vec::new(),
            volume: 0.0,
        }
    }

    pub fn reference(&self) -> &Point {
        &self.reference
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// All inserted points in insertion order.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Non-dominated subset, sorted by ascending first objective.
    pub fn non_dominated(&self) -> &[Point] {
        &self.front
    }

    pub fn insert(&mut self, p: Point) {
        self.points.push(p);
        if p.iter().any(|v| v.is_nan()) {
            return;
        }
        // the front is sorted by f1 ascending and therefore f2 descending
        let pos = self.front.partition_point(|f| f[0] <= p[0]);
        if pos > 0 && self.front[pos - 1][1] <= p[1] {
            return;
        }
        let start = self.front[..pos].partition_point(|f| f[0] < p[0]);
        let end = pos + self.front[pos..].partition_point(|f| f[1] >= p[1]);
        self.volume += self.improvement(&p, start, end);
        self.front.splice(start..end, [p]);
    }

    /// Area gained by inserting `p` in place of `front[start..end]`, the
    /// points it dominates. Only the strip between the neighbours of `p`
    /// changes.
    fn improvement(&self, p: &Point, start: usize, end: usize) -> f64 {
        let r = self.reference;
        if p[0] >= r[0] || p[1] >= r[1] {
            return 0.0;
        }
        let right = self.front.get(end).map_or(r[0], |n| n[0].min(r[0]));
        let top = match start {
            0 => r[1],
            _ => self.front[start - 1][1].min(r[1]),
        };
        let mut removed = 0.0;
        let mut ceiling = top;
        for q in &self.front[start..end] {
            if q[1] < ceiling {
                removed += (right - q[0]).max(0.0) * (ceiling - q[1]);
                ceiling = q[1];
            }
        }
        ((right - p[0]) * (top - p[1]) - removed).max(0.0)
    }

    /// Hypervolume of the front, accumulated from the exact gain of every
    /// insertion so that it never decreases.
    pub fn hypervolume(&self) -> f64 {
        self.volume
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_objective::indicators::{dominates, front, hypervolume_2d, weakly_dominates};
    use proptest::prelude::*;

    #[test]
    fn keeps_only_non_dominated_points() {
        let mut a = ParetoArchive::new([3.0, 3.0]);
        for p in [[2.0, 2.0], [1.0, 2.5], [2.0, 2.0], [1.5, 1.5], [4.0, 0.0]] {
            a.insert(p);
        }
        assert_eq!(a.len(), 5);
        let front = a.non_dominated().to_vec();
        assert_eq!(front, vec![[1.0, 2.5], [1.5, 1.5], [4.0, 0.0]]);
        for x in &front {
            for y in &front {
                assert!(!dominates(x, y));
            }
        }
        // the point outside the box adds nothing
        assert!((a.hypervolume() - (2.0 * 0.5 + 1.5 * 1.0)).abs() < 1e-15);
    }

    #[test]
    fn hypervolume_never_decreases() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut a = ParetoArchive::new([1.0, 1.0]);
        let mut last = 0.0;
        for _ in 0..500 {
            a.insert([rng.random::<f64>(), rng.random::<f64>()]);
            let hv = a.hypervolume();
            assert!(hv >= last);
            last = hv;
        }
    }

    proptest! {
        #[test]
        fn front_matches_brute_force(
            raw in prop::collection::vec((0u8..6, 0u8..6), 1..40),
        ) {
            let pts: Vec<Point> = raw.iter().map(|&(a, b)| [a as f64 * 0.25, b as f64 * 0.25]).collect();
            let r = [1.0, 1.0];
            let mut a = ParetoArchive::new(r);
            for p in &pts {
                a.insert(*p);
            }
            let mut brute: Vec<Point> = pts
                .iter()
                .filter(|p| !pts.iter().any(|q| dominates(q, p)))
                .copied()
                .collect();
            brute.sort_by(|x, y| x[0].total_cmp(&y[0]));
            brute.dedup();
            prop_assert_eq!(a.non_dominated(), &brute[..]);
            prop_assert!(a.non_dominated().windows(2).all(|w| !weakly_dominates(&w[0], &w[1])));
            prop_assert!((a.hypervolume() - hypervolume_2d(&pts, &r)).abs() <= 1e-12);
            prop_assert_eq!(front(a.non_dominated(), &r), front(&pts, &r));
        }
    }
}
