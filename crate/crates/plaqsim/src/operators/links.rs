//! Brute-force plaquette operator from explicit link operators.
//!
//! Works in the full per-link basis `|j, m, m'>` (a projection at each end
//! of every link). Gauge-invariant lattice states are built by contracting
//! Clebsch-Gordan coefficients at every vertex and summing all alignments;
//! the plaquette operator is the corner-index sum of four link operators,
//! one per link of the plaquette. Exponential in the lattice size, so this
//! is an oracle for small systems, not a production path.

use std::collections::HashMap;

use crate::angular::{clebsch_gordan, dim, HalfInt};
use crate::error::{Error, Result};
use crate::lattice::{BasisState, LatticeSpec, RegisterKind};

/// One nonzero entry of the half-unit link operator: `|j, a, b>` to
/// `|J, a+alpha, b+beta>` with its amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkTransition {
    pub j_from: HalfInt,
    pub m_first_from: HalfInt,
    pub m_second_from: HalfInt,
    pub j_to: HalfInt,
    pub m_first_to: HalfInt,
    pub m_second_to: HalfInt,
    pub amplitude: f64,
}

/// All nonzero link-operator entries out of magnitude `j_in` for end
/// increments `alpha`, `beta` (each half a unit), dropping transitions above
/// the truncation. The raised and lowered branches `J = j +- 1/2` are the
/// only ones that appear.
pub fn link_operator_matrix(
    j_in: HalfInt,
    alpha: HalfInt,
    beta: HalfInt,
    truncation: HalfInt,
) -> Result<Vec<LinkTransition>> {
    if alpha.abs() != HalfInt::HALF || beta.abs() != HalfInt::HALF {
        return Err(Error::InvalidArgument(format!(
            "link end increments must be +-1/2, got alpha = {alpha}, beta = {beta}"
        )));
    }
    if j_in.is_negative() || j_in.twice() > truncation.twice() {
        return Err(Error::UnsupportedTruncation(format!(
            "link magnitude {j_in} outside [0, {truncation}]"
        )));
    }
    let mut entries = Vec::new();
    for a in j_in.projections() {
        for b in j_in.projections() {
            for branch in [-1, 1] {
                let j_to = HalfInt::from_twice(j_in.twice() + branch);
                if j_to.is_negative() || j_to.twice() > truncation.twice() {
                    continue;
                }
                let amp = link_amplitude(j_in, a, b, j_to, alpha, beta);
                if amp != 0.0 {
                    entries.push(LinkTransition {
                        j_from: j_in,
                        m_first_from: a,
                        m_second_from: b,
                        j_to,
                        m_first_to: a + alpha,
                        m_second_to: b + beta,
                        amplitude: amp,
                    });
                }
            }
        }
    }
    Ok(entries)
}

fn link_amplitude(
    j: HalfInt,
    a: HalfInt,
    b: HalfInt,
    j_to: HalfInt,
    alpha: HalfInt,
    beta: HalfInt,
) -> f64 {
    let half = HalfInt::HALF;
    let ratio = (dim(j) as f64 / dim(j_to) as f64).sqrt();
    ratio
        * clebsch_gordan(j, a, half, alpha, j_to, a + alpha)
        * clebsch_gordan(j, b, half, beta, j_to, b + beta)
}

/// Per-link state in twice-units: magnitude and the projections at the two
/// ends. For chain links the ends are (left, right); for rungs (top, bottom).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct LinkM {
    tj: i8,
    ta: i8,
    tb: i8,
}

/// Sparse vector over the full product basis: one `LinkM` per link, ordered
/// as top links `0..L`, bottom links `L..2L`, rungs `2L..3L`.
#[derive(Debug, Clone)]
pub struct GaugeState {
    terms: HashMap<Vec<LinkM>, f64>,
}

impl GaugeState {
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &GaugeState) -> f64 {
        // Iterate the smaller map.
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (&self.terms, &other.terms)
        } else {
            (&other.terms, &self.terms)
        };
        small
            .iter()
            .filter_map(|(k, a)| large.get(k).map(|b| a * b))
            .sum()
    }
}

fn register_values(spec: &LatticeSpec, state: &BasisState) -> (Vec<HalfInt>, Vec<HalfInt>, Vec<HalfInt>) {
    let l = spec.num_plaquettes;
    let mut top = vec![HalfInt::ZERO; l];
    let mut bottom = vec![HalfInt::ZERO; l];
    let mut rung = vec![HalfInt::ZERO; l];
    for r in 0..spec.register_count() {
        match spec.register_kind(r) {
            RegisterKind::TopLink(i) => {
                top[i] = state.value(r);
                if spec.identify_top_bottom {
                    bottom[i] = state.value(r);
                }
            }
            RegisterKind::BottomLink(i) => bottom[i] = state.value(r),
            RegisterKind::Rung(i) => rung[i] = state.value(r),
        }
    }
    (top, bottom, rung)
}

/// All alignment assignments of one periodic chain. Returns, per surviving
/// assignment, the per-link (left, right) projections, the rung-end
/// projections it induces, and the product of vertex Clebsch-Gordan
/// coefficients.
fn chain_terms(links: &[HalfInt], rungs: &[HalfInt]) -> Vec<(Vec<(i8, i8)>, Vec<i8>, f64)> {
    let l = links.len();
    let mut out = Vec::new();
    let mut assignment: Vec<(i8, i8)> = vec![(0, 0); l];

    fn recurse(
        links: &[HalfInt],
        rungs: &[HalfInt],
        assignment: &mut Vec<(i8, i8)>,
        link: usize,
        out: &mut Vec<(Vec<(i8, i8)>, Vec<i8>, f64)>,
    ) {
        let l = links.len();
        if link == l {
            // Vertex i couples link i's right end with link i+1's left end
            // into rung i's end.
            let mut rung_proj = vec![0i8; l];
            let mut coeff = 1.0;
            for i in 0..l {
                let j_here = links[i];
                let j_next = links[(i + 1) % l];
                let m_right = HalfInt::from_twice(assignment[i].1 as i32);
                let m_left_next = HalfInt::from_twice(assignment[(i + 1) % l].0 as i32);
                let n = m_right + m_left_next;
                if n.abs().twice() > rungs[i].twice() {
                    return;
                }
                coeff *= clebsch_gordan(j_here, m_right, j_next, m_left_next, rungs[i], n);
                if coeff == 0.0 {
                    return;
                }
                rung_proj[i] = n.twice() as i8;
            }
            out.push((assignment.clone(), rung_proj, coeff));
            return;
        }
        for ma in links[link].projections() {
            for mb in links[link].projections() {
                assignment[link] = (ma.twice() as i8, mb.twice() as i8);
                recurse(links, rungs, assignment, link + 1, out);
            }
        }
    }

    recurse(links, rungs, &mut assignment, 0, &mut out);
    out
}

/// The gauge-invariant lattice state with the given definite link
/// magnitudes: all alignments summed with a vertex Clebsch-Gordan
/// contraction on the top and bottom chains, normalized by the product of
/// inverse rung dimensions. Zero for configurations violating Gauss's law.
pub fn gauge_invariant_state(spec: &LatticeSpec, state: &BasisState) -> Result<GaugeState> {
    let l = spec.num_plaquettes;
    let (top, bottom, rung) = register_values(spec, state);
    let top_terms = chain_terms(&top, &rung);
    let bottom_terms = chain_terms(&bottom, &rung);
    let normalization: f64 = rung.iter().map(|q| 1.0 / dim(*q) as f64).product();

    let mut terms = HashMap::with_capacity(top_terms.len() * bottom_terms.len());
    for (top_m, rung_top, ct) in &top_terms {
        for (bottom_m, rung_bottom, cb) in &bottom_terms {
            let mut key = Vec::with_capacity(3 * l);
            for (i, &(ma, mb)) in top_m.iter().enumerate() {
                key.push(LinkM {
                    tj: top[i].twice() as i8,
                    ta: ma,
                    tb: mb,
                });
            }
            for (i, &(ma, mb)) in bottom_m.iter().enumerate() {
                key.push(LinkM {
                    tj: bottom[i].twice() as i8,
                    ta: ma,
                    tb: mb,
                });
            }
            for i in 0..l {
                key.push(LinkM {
                    tj: rung[i].twice() as i8,
                    ta: rung_top[i],
                    tb: rung_bottom[i],
                });
            }
            *terms.entry(key).or_insert(0.0) += normalization * ct * cb;
        }
    }
    terms.retain(|_, a| *a != 0.0);
    Ok(GaugeState { terms })
}

/// Branches of the link operator on one link for fixed end increments.
fn link_branches(lm: LinkM, t_da: i8, t_db: i8, t_trunc: i32) -> Vec<(LinkM, f64)> {
    let j = HalfInt::from_twice(lm.tj as i32);
    let a = HalfInt::from_twice(lm.ta as i32);
    let b = HalfInt::from_twice(lm.tb as i32);
    let alpha = HalfInt::from_twice(t_da as i32);
    let beta = HalfInt::from_twice(t_db as i32);
    let mut out = Vec::with_capacity(2);
    for branch in [-1, 1] {
        let j_to = HalfInt::from_twice(lm.tj as i32 + branch);
        if j_to.is_negative() || j_to.twice() > t_trunc {
            continue;
        }
        let amp = link_amplitude(j, a, b, j_to, alpha, beta);
        if amp != 0.0 {
            out.push((
                LinkM {
                    tj: j_to.twice() as i8,
                    ta: (a + alpha).twice() as i8,
                    tb: (b + beta).twice() as i8,
                },
                amp,
            ));
        }
    }
    out
}

/// Apply the plaquette operator for plaquette `p` as the sum over the four
/// corner indices of products of four link operators. Corner increments are
/// shared between the two links meeting at each corner.
pub fn apply_plaquette_from_links(spec: &LatticeSpec, p: usize, input: &GaugeState) -> GaugeState {
    let l = spec.num_plaquettes;
    let t_trunc = spec.truncation.twice();
    let top_idx = p;
    let bottom_idx = l + p;
    let left_rung_idx = 2 * l + (p + l - 1) % l;
    let right_rung_idx = 2 * l + p;

    let mut out: HashMap<Vec<LinkM>, f64> = HashMap::with_capacity(input.terms.len());
    let corners = [-1i8, 1i8];
    for (key, amp) in &input.terms {
        for tl in corners {
            for tr in corners {
                for bl in corners {
                    for br in corners {
                        // Top link ends (left, right) sit at corners TL, TR;
                        // bottom link at BL, BR; left rung ends (top, bottom)
                        // at TL, BL; right rung at TR, BR.
                        let top_branches = link_branches(key[top_idx], tl, tr, t_trunc);
                        if top_branches.is_empty() {
                            continue;
                        }
                        let bottom_branches = link_branches(key[bottom_idx], bl, br, t_trunc);
                        if bottom_branches.is_empty() {
                            continue;
                        }
                        let left_branches = link_branches(key[left_rung_idx], tl, bl, t_trunc);
                        if left_branches.is_empty() {
                            continue;
                        }
                        let right_branches = link_branches(key[right_rung_idx], tr, br, t_trunc);
                        for &(t_lm, t_c) in &top_branches {
                            for &(b_lm, b_c) in &bottom_branches {
                                for &(l_lm, l_c) in &left_branches {
                                    for &(r_lm, r_c) in &right_branches {
                                        let c = amp * t_c * b_c * l_c * r_c;
                                        let mut new_key = key.clone();
                                        new_key[top_idx] = t_lm;
                                        new_key[bottom_idx] = b_lm;
                                        new_key[left_rung_idx] = l_lm;
                                        new_key[right_rung_idx] = r_lm;
                                        *out.entry(new_key).or_insert(0.0) += c;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.retain(|_, a| a.abs() > 1e-300);
    GaugeState { terms: out }
}

/// Matrix element of the composed plaquette operator between two
/// gauge-invariant lattice configurations. This is the independent
/// cross-check of the analytic matrix-element formula.
pub fn compose_plaquette_element(
    spec: &LatticeSpec,
    p: usize,
    final_state: &BasisState,
    initial_state: &BasisState,
) -> Result<f64> {
    check_oracle_spec(spec, p)?;
    let ket = gauge_invariant_state(spec, initial_state)?;
    let bra = gauge_invariant_state(spec, final_state)?;
    let applied = apply_plaquette_from_links(spec, p, &ket);
    Ok(bra.dot(&applied))
}

fn check_oracle_spec(spec: &LatticeSpec, p: usize) -> Result<()> {
    if spec.num_plaquettes < 2 || spec.num_plaquettes % 2 != 0 {
        return Err(Error::InvalidLattice(
            "the link-composition oracle needs an even number of plaquettes (at least two)"
                .into(),
        ));
    }
    if p >= spec.num_plaquettes {
        return Err(Error::InvalidLattice(format!(
            "plaquette index {p} out of range"
        )));
    }
    // Keep the alignment sum within reason: the term count scales as the
    // product of squared link dimensions along each chain.
    let per_chain = (dim(spec.truncation) as f64).powi(2 * spec.num_plaquettes as i32);
    if per_chain * per_chain > 1e8 {
        return Err(Error::SizeBound {
            dim: (per_chain * per_chain) as usize,
            bound: 1e8 as usize,
        });
    }
    Ok(())
}
