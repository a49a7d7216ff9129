//! Phantom edge sets: edges present in the phase operator with weight α but
//! absent from the optimization target.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhantomMethod {
    /// Every non-edge of the base graph.
    Full,
    /// Every pair at distance two in the base graph.
    Triangle,
    /// Pairs at distance three on a cycle.
    Cycle3,
    Custom,
}

impl std::fmt::Display for PhantomMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PhantomMethod::Full => "full",
            PhantomMethod::Triangle => "triangle",
            PhantomMethod::Cycle3 => "cycle3",
            PhantomMethod::Custom => "custom",
        })
    }
}

impl std::str::FromStr for PhantomMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(PhantomMethod::Full),
            "triangle" => Ok(PhantomMethod::Triangle),
            "cycle3" => Ok(PhantomMethod::Cycle3),
            "custom" => Ok(PhantomMethod::Custom),
            other => invalid(format!("unknown phantom method '{other}'")),
        }
    }
}

/// Neighbor and triangle counts around one base edge `(u, v)`.
///
/// `d`/`e` count base neighbors of `u`/`v` other than the partner, `d_p`/`e_p`
/// count phantom neighbors. Every common neighbor `w` of `u` and `v` in the
/// union graph is counted exactly once: in `f` when both `(u,w)` and `(v,w)`
/// are base edges, in `f_mixed` when one is base and the other phantom, and
/// in `f_pp` when both are phantom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct EdgeEnvironment {
    pub d: u32,
    pub e: u32,
    pub d_p: u32,
    pub e_p: u32,
    pub f: u32,
    pub f_mixed: u32,
    pub f_pp: u32,
}

impl EdgeEnvironment {
    pub fn is_triangle_free(&self) -> bool {
        self.f == 0 && self.f_mixed == 0 && self.f_pp == 0
    }

    /// The same edge seen from `(v, u)`.
    pub fn swapped(&self) -> Self {
        Self {
            d: self.e,
            e: self.d,
            d_p: self.e_p,
            e_p: self.d_p,
            ..*self
        }
    }
}

/// A base graph together with a disjoint phantom edge set.
///
/// The phantom weight α is not stored; it is supplied at evaluation time.
/// Edge environments are computed once at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhantomGraphFile", into = "PhantomGraphFile")]
pub struct PhantomGraph {
    base: Graph,
    phantom: Graph,
    method: PhantomMethod,
    environments: Vec<EdgeEnvironment>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhantomGraphFile {
    pub n: usize,
    pub base_edges: Vec<[usize; 2]>,
    pub phantom_edges: Vec<[usize; 2]>,
    pub method: PhantomMethod,
}

impl TryFrom<PhantomGraphFile> for PhantomGraph {
    type Error = Error;

    fn try_from(file: PhantomGraphFile) -> Result<Self> {
        let base = Graph::new(file.n, file.base_edges.iter().map(|&[u, v]| (u, v)))?;
        let phantom = file.phantom_edges.iter().map(|&[u, v]| (u, v));
        let mut pg = PhantomGraph::custom(base, phantom)?;
        pg.method = file.method;
        Ok(pg)
    }
}

impl From<PhantomGraph> for PhantomGraphFile {
    fn from(pg: PhantomGraph) -> Self {
        let pairs = |g: &Graph| g.edges().iter().map(|&(u, v)| [u, v]).collect();
        PhantomGraphFile {
            n: pg.base.n(),
            base_edges: pairs(&pg.base),
            phantom_edges: pairs(&pg.phantom),
            method: pg.method,
        }
    }
}

impl PhantomGraph {
    /// Arbitrary phantom edge set; must be disjoint from the base edges.
    pub fn custom(base: Graph, phantom: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let phantom = Graph::new(base.n(), phantom)?;
        if let Some(&(u, v)) = phantom.edges().iter().find(|&&(u, v)| base.has_edge(u, v)) {
            return invalid(format!("phantom edge ({u}, {v}) is already a base edge"));
        }
        Ok(Self::assemble(base, phantom, PhantomMethod::Custom))
    }

    /// No phantom edges: the standard ansatz.
    pub fn standard(base: Graph) -> Self {
        let phantom = Graph::empty(base.n()).expect("base graph has n >= 1");
        Self::assemble(base, phantom, PhantomMethod::Custom)
    }

    /// Phantom edges on every non-edge, making the union graph complete.
    pub fn full_method(base: Graph) -> Self {
        let phantom = Graph::new(base.n(), base.complement_edges()).expect("complement is simple");
        Self::assemble(base, phantom, PhantomMethod::Full)
    }

    /// Phantom edges between every pair at distance two.
    pub fn triangle_method(base: Graph) -> Self {
        let phantom = Graph::new(base.n(), base.distance_two_pairs()).expect("distance-2 pairs are simple");
        Self::assemble(base, phantom, PhantomMethod::Triangle)
    }

    /// Phantom edges between cycle vertices three hops apart.
    ///
    /// Fails unless `base` is a cycle with at least 7 vertices whose union
    /// with the phantom edges has no triangle through any base edge.
    pub fn cycle_three_hop(base: Graph) -> Result<Self> {
        if base.n() < 7 || base.regular_degree() != Some(2) || !base.is_connected() {
            return invalid("three-hop construction needs a cycle with at least 7 vertices");
        }
        let phantom = Graph::new(base.n(), base.pairs_at_distance(3))?;
        let pg = Self::assemble(base, phantom, PhantomMethod::Cycle3);
        if !pg.environments.iter().all(EdgeEnvironment::is_triangle_free) {
            return invalid(format!(
                "three-hop phantom edges on a {}-cycle close triangles",
                pg.base.n()
            ));
        }
        Ok(pg)
    }

    pub fn build(base: Graph, method: PhantomMethod) -> Result<Self> {
        match method {
            PhantomMethod::Full => Ok(Self::full_method(base)),
            PhantomMethod::Triangle => Ok(Self::triangle_method(base)),
            PhantomMethod::Cycle3 => Self::cycle_three_hop(base),
            PhantomMethod::Custom => Ok(Self::standard(base)),
        }
    }

    fn assemble(base: Graph, phantom: Graph, method: PhantomMethod) -> Self {
        let environments = base
            .edges()
            .iter()
            .map(|&(u, v)| compute_environment(&base, &phantom, u, v))
            .collect();
        Self {
            base,
            phantom,
            method,
            environments,
        }
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn method(&self) -> PhantomMethod {
        self.method
    }

    pub fn phantom_edges(&self) -> &[(usize, usize)] {
        self.phantom.edges()
    }

    pub fn phantom_graph(&self) -> &Graph {
        &self.phantom
    }

    /// Environments in base-edge order.
    pub fn environments(&self) -> &[EdgeEnvironment] {
        &self.environments
    }

    pub fn edge_environment(&self, u: usize, v: usize) -> Result<EdgeEnvironment> {
        let key = (u.min(v), u.max(v));
        match self.base.edges().binary_search(&key) {
            Ok(i) if u <= v => Ok(self.environments[i]),
            Ok(i) => Ok(self.environments[i].swapped()),
            Err(_) => invalid(format!("({u}, {v}) is not a base edge")),
        }
    }
}

fn compute_environment(base: &Graph, phantom: &Graph, u: usize, v: usize) -> EdgeEnvironment {
    let mut env = EdgeEnvironment {
        d: (base.degree(u) - 1) as u32,
        e: (base.degree(v) - 1) as u32,
        d_p: phantom.degree(u) as u32,
        e_p: phantom.degree(v) as u32,
        ..Default::default()
    };
    for w in (0..base.n()).filter(|&w| w != u && w != v) {
        let (bu, bv) = (base.has_edge(u, w), base.has_edge(v, w));
        let (pu, pv) = (phantom.has_edge(u, w), phantom.has_edge(v, w));
        if bu && bv {
            env.f += 1;
        } else if (bu && pv) || (pu && bv) {
            env.f_mixed += 1;
        } else if pu && pv {
            env.f_pp += 1;
        }
    }
    env
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, cycle_graph};

    #[test]
    fn full_method_examples() {
        assert_eq!(PhantomGraph::full_method(cycle_graph(4).unwrap()).phantom_edges(), &[(0, 2), (1, 3)]);
        assert!(PhantomGraph::full_method(complete_graph(4).unwrap()).phantom_edges().is_empty());
        assert_eq!(PhantomGraph::full_method(cycle_graph(8).unwrap()).phantom_edges().len(), 20);
    }

    #[test]
    fn triangle_method_examples() {
        let pg = PhantomGraph::triangle_method(cycle_graph(8).unwrap());
        assert_eq!(pg.phantom_edges().len(), 8);
        for i in 0..8 {
            assert!(pg.phantom_graph().has_edge(i, (i + 2) % 8));
        }
        assert!(PhantomGraph::triangle_method(complete_graph(4).unwrap()).phantom_edges().is_empty());
        let star = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(PhantomGraph::triangle_method(star).phantom_edges(), &[(1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn cycle_three_hop_examples() {
        let pg = PhantomGraph::cycle_three_hop(cycle_graph(8).unwrap()).unwrap();
        assert_eq!(pg.phantom_edges().len(), 8);
        let env = pg.edge_environment(0, 1).unwrap();
        assert_eq!(
            env,
            EdgeEnvironment { d: 1, e: 1, d_p: 2, e_p: 2, ..Default::default() }
        );
        let pg12 = PhantomGraph::cycle_three_hop(cycle_graph(12).unwrap()).unwrap();
        assert_eq!(pg12.phantom_edges().len(), 12);
        assert!(pg12.environments().iter().all(EdgeEnvironment::is_triangle_free));
        assert!(PhantomGraph::cycle_three_hop(cycle_graph(6).unwrap()).is_err());
        // 1 + 3 + 3 = 7 closes a triangle on the 7-cycle.
        assert!(PhantomGraph::cycle_three_hop(cycle_graph(7).unwrap()).is_err());
        assert!(PhantomGraph::cycle_three_hop(complete_graph(8).unwrap()).is_err());
    }

    #[test]
    fn environment_examples() {
        let tri = PhantomGraph::triangle_method(cycle_graph(8).unwrap());
        assert_eq!(
            tri.edge_environment(0, 1).unwrap(),
            EdgeEnvironment { d: 1, e: 1, d_p: 2, e_p: 2, f: 0, f_mixed: 2, f_pp: 0 }
        );
        let k4 = PhantomGraph::full_method(complete_graph(4).unwrap());
        assert_eq!(
            k4.edge_environment(0, 1).unwrap(),
            EdgeEnvironment { d: 2, e: 2, d_p: 0, e_p: 0, f: 2, f_mixed: 0, f_pp: 0 }
        );
        assert!(tri.edge_environment(0, 2).is_err());
    }

    #[test]
    fn environment_orientation() {
        let g = Graph::new(5, [(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let pg = PhantomGraph::triangle_method(g);
        let fwd = pg.edge_environment(0, 1).unwrap();
        let back = pg.edge_environment(1, 0).unwrap();
        assert_eq!(fwd.d, 0);
        assert_eq!(fwd.e, 2);
        assert_eq!(back, fwd.swapped());
    }

    #[test]
    fn custom_rejects_overlap() {
        let c4 = cycle_graph(4).unwrap();
        assert!(PhantomGraph::custom(c4.clone(), [(0, 1)]).is_err());
        assert!(PhantomGraph::custom(c4, [(0, 2)]).is_ok());
    }

    #[test]
    fn json_schema() {
        let pg = PhantomGraph::triangle_method(cycle_graph(4).unwrap());
        let text = serde_json::to_string(&pg).unwrap();
        assert_eq!(
            text,
            r#"{"n":4,"base_edges":[[0,1],[0,3],[1,2],[2,3]],"phantom_edges":[[0,2],[1,3]],"method":"triangle"}"#
        );
        let back: PhantomGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, pg);
    }
}
