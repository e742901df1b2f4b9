//! Terminated-frame Viterbi search shared by the single-user and joint
//! trellis decoders.
//!
//! The decoder is generic over a trellis "view" (states plus per-state edge
//! fan-out) and a per-step edge metric. All comparisons are strict
//! improvements, so ties resolve to the lowest predecessor and edge index
//! and decoding is deterministic.

/// Minimal structural view of a trellis for path search.
pub(crate) trait TrellisView {
    fn num_states(&self) -> usize;
    /// Number of outgoing edges of `state`; edge indices double as input
    /// values.
    fn num_edges(&self, state: usize) -> usize;
    fn next_state(&self, state: usize, edge: usize) -> usize;
}

/// Minimum-metric path of `steps` transitions from `start` to `end`.
///
/// `metric(step, state, edge)` is the branch cost of taking `edge` out of
/// `state` at time `step`. Returns the edge index chosen at every step and
/// the total path metric. Panics only if no path exists, which cannot
/// happen for the connected trellises this crate builds (termination uses
/// steering sequences validated at construction).
pub(crate) fn viterbi_path<V, M>(
    trellis: &V,
    steps: usize,
    start: usize,
    end: usize,
    metric: M,
) -> (Vec<usize>, f64)
where
    V: TrellisView + ?Sized,
    M: Fn(usize, usize, usize) -> f64,
{
    let states = trellis.num_states();
    let mut cost = vec![f64::INFINITY; states];
    cost[start] = 0.0;
    // survivors[step][state] = (previous state, edge index taken).
    let mut survivors: Vec<Vec<(u32, u32)>> = Vec::with_capacity(steps);
    for step in 0..steps {
        let mut next_cost = vec![f64::INFINITY; states];
        let mut back = vec![(u32::MAX, u32::MAX); states];
        for (state, &state_cost) in cost.iter().enumerate() {
            if !state_cost.is_finite() {
                continue;
            }
            for edge in 0..trellis.num_edges(state) {
                let to = trellis.next_state(state, edge);
                let candidate = state_cost + metric(step, state, edge);
                if candidate < next_cost[to] {
                    next_cost[to] = candidate;
                    back[to] = (state as u32, edge as u32);
                }
            }
        }
        survivors.push(back);
        cost = next_cost;
    }
    assert!(
        cost[end].is_finite(),
        "no trellis path of length {steps} from state {start} to state {end}"
    );
    let mut path = vec![0usize; steps];
    let mut state = end;
    for step in (0..steps).rev() {
        let (prev, edge) = survivors[step][state];
        path[step] = edge as usize;
        state = prev as usize;
    }
    (path, cost[end])
}
