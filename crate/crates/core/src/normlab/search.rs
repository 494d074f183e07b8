//! Branch-and-bound enumeration of rank subsets of a sorted profile.

use crate::vectors::SortedProfile;

/// Visits subsets of `{0, …, n−1}` (ranks into `profile`) of size at most
/// `max_size`, in lexicographic order of their sorted rank lists.
///
/// `could_qualify(k, bound)` is asked whether some `k`-set whose `p`-power
/// sum is at most `bound` can still matter; it must be monotone in `bound`.
/// A branch is cut once no size reachable from it could qualify, using the
/// largest remaining powers as the completion bound. `visit(ranks, sum)`
/// receives every surviving node with its exact sequential power sum.
pub(crate) fn for_each_subset<Q, V>(
    profile: &SortedProfile,
    max_size: usize,
    mut could_qualify: Q,
    mut visit: V,
) where
    Q: FnMut(usize, f64) -> bool,
    V: FnMut(&[usize], f64),
{
    let n = profile.len();
    let walk = Walk {
        powers: profile.powers(),
        prefix: profile.prefix_p(),
        max_size: max_size.min(n),
        slack: 1e-12 * profile.prefix_p()[n],
    };
    let mut chosen = Vec::with_capacity(walk.max_size);
    walk.descend(0, 0.0, &mut chosen, &mut could_qualify, &mut visit);
}

struct Walk<'a> {
    powers: &'a [f64],
    prefix: &'a [f64],
    max_size: usize,
    // covers rounding in prefix differences
    slack: f64,
}

impl Walk<'_> {
    fn descend<Q, V>(
        &self,
        start: usize,
        sum: f64,
        chosen: &mut Vec<usize>,
        could_qualify: &mut Q,
        visit: &mut V,
    ) where
        Q: FnMut(usize, f64) -> bool,
        V: FnMut(&[usize], f64),
    {
        let n = self.powers.len();
        let r = chosen.len();
        if r == self.max_size {
            return;
        }
        for j in start..n {
            let alive = (r + 1..=self.max_size)
                .take_while(|&k| j + (k - r) <= n)
                .any(|k| {
                    let tail = self.prefix[j + k - r] - self.prefix[j];
                    could_qualify(k, sum + tail + self.slack)
                });
            if !alive {
                // later ranks only have smaller completions
                break;
            }
            chosen.push(j);
            let s = sum + self.powers[j];
            visit(chosen, s);
            self.descend(j + 1, s, chosen, could_qualify, visit);
            chosen.pop();
        }
    }
}
