//! Network graph: routers with attached clients and services, directed links
//! with drop-tail egress queues, and static shortest-path routes.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::time::SimTime;

/// Main (router to router) link bandwidth in the reference network.
pub const MAIN_LINK_BPS: u64 = 512_000;
/// Sub (router to leaf) link bandwidth in the reference network.
pub const SUB_LINK_BPS: u64 = 256_000;
/// Drop-tail capacity (waiting packets) used when nothing else is configured.
/// One request per client still crosses a main link without loss, while an
/// unpaced reply storm overflows it.
pub const DEFAULT_QUEUE_CAPACITY: usize = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown link {0:?}")]
    UnknownLink(LinkId),
    #[error("route endpoints are the same node {0}")]
    SameEndpoints(NodeId),
    #[error("no route from {from} to {to}")]
    Unreachable { from: NodeId, to: NodeId },
    #[error("node {0} is not a router")]
    NotARouter(NodeId),
    #[error("operation requires a {expected:?} network")]
    WrongLayout { expected: Layout },
    #[error("invalid link parameters: {0}")]
    InvalidLink(String),
    #[error("invalid network: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, TopologyError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Router,
    Client,
    Service,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LinkClass {
    /// Router to router.
    Main,
    /// Router to client or service.
    Sub,
}

/// One direction of a cable. A duplex cable is two `Link`s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Link {
    pub id: LinkId,
    pub src: NodeId,
    pub dst: NodeId,
    pub bandwidth_bps: u64,
    pub delay: SimTime,
    pub queue_capacity: usize,
    pub class: LinkClass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layout {
    /// Routers form a simple path.
    Decentralised,
    /// Every router hangs off a single root router.
    Centralised,
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layout::Decentralised => f.write_str("decentralised"),
            Layout::Centralised => f.write_str("centralised"),
        }
    }
}

impl std::str::FromStr for Layout {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "decentralised" | "decentralized" | "chain" => Ok(Layout::Decentralised),
            "centralised" | "centralized" | "star" => Ok(Layout::Centralised),
            other => Err(format!("unknown layout '{other}'")),
        }
    }
}

/// Ordered, contiguous list of links from a source to a destination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Route {
    pub links: Vec<LinkId>,
}

impl Route {
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }
}

/// The two sides of a router chain cut at one router.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub left: BTreeSet<NodeId>,
    pub right: BTreeSet<NodeId>,
}

/// Link parameters applied when building a network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkParams {
    pub main_bps: u64,
    pub sub_bps: u64,
    pub delay: SimTime,
    pub queue_capacity: usize,
}

impl Default for LinkParams {
    fn default() -> Self {
        LinkParams {
            main_bps: MAIN_LINK_BPS,
            sub_bps: SUB_LINK_BPS,
            delay: SimTime::ZERO,
            queue_capacity: DEFAULT_QUEUE_CAPACITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    nodes: Vec<Node>,
    links: Vec<Link>,
    egress: Vec<Vec<LinkId>>,
    layout: Layout,
}

impl Network {
    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.nodes
            .get(id.0 as usize)
            .ok_or(TopologyError::UnknownNode(id))
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0]
    }

    pub fn kind(&self, id: NodeId) -> Result<NodeKind> {
        self.node(id).map(|n| n.kind)
    }

    pub fn name(&self, id: NodeId) -> &str {
        self.nodes
            .get(id.0 as usize)
            .map(|n| n.name.as_str())
            .unwrap_or("?")
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.name == name).map(|n| n.id)
    }

    pub fn egress(&self, id: NodeId) -> &[LinkId] {
        &self.egress[id.0 as usize]
    }

    fn of_kind(&self, kind: NodeKind) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .filter(move |n| n.kind == kind)
            .map(|n| n.id)
    }

    pub fn routers(&self) -> Vec<NodeId> {
        self.of_kind(NodeKind::Router).collect()
    }

    pub fn clients(&self) -> Vec<NodeId> {
        self.of_kind(NodeKind::Client).collect()
    }

    pub fn services(&self) -> Vec<NodeId> {
        self.of_kind(NodeKind::Service).collect()
    }

    /// Directed link from `src` to `dst`, if they are neighbours.
    pub fn link_between(&self, src: NodeId, dst: NodeId) -> Option<LinkId> {
        self.egress
            .get(src.0 as usize)?
            .iter()
            .copied()
            .find(|&l| self.links[l.0].dst == dst)
    }

    /// Opposite direction of `link`.
    pub fn reverse(&self, link: LinkId) -> LinkId {
        let l = &self.links[link.0];
        self.link_between(l.dst, l.src)
            .expect("links are always built in duplex pairs")
    }

    /// Router a client or service hangs off.
    pub fn attached_router(&self, leaf: NodeId) -> Result<NodeId> {
        match self.kind(leaf)? {
            NodeKind::Router => Err(TopologyError::Invalid(format!(
                "{} is a router, not a leaf",
                self.name(leaf)
            ))),
            _ => Ok(self.links[self.egress(leaf)[0].0].dst),
        }
    }

    fn leaves_of(&self, router: NodeId, kind: NodeKind) -> Result<Vec<NodeId>> {
        if self.kind(router)? != NodeKind::Router {
            return Err(TopologyError::NotARouter(router));
        }
        Ok(self
            .egress(router)
            .iter()
            .map(|&l| self.links[l.0].dst)
            .filter(|&n| self.nodes[n.0 as usize].kind == kind)
            .collect())
    }

    pub fn clients_of(&self, router: NodeId) -> Result<Vec<NodeId>> {
        self.leaves_of(router, NodeKind::Client)
    }

    pub fn services_of(&self, router: NodeId) -> Result<Vec<NodeId>> {
        self.leaves_of(router, NodeKind::Service)
    }

    pub fn client_count(&self, router: NodeId) -> Result<usize> {
        self.clients_of(router).map(|v| v.len())
    }

    pub fn service_count(&self, router: NodeId) -> Result<usize> {
        self.services_of(router).map(|v| v.len())
    }

    /// Routers adjacent to `router` over main links.
    pub fn router_neighbours(&self, router: NodeId) -> Vec<NodeId> {
        self.egress(router)
            .iter()
            .map(|&l| &self.links[l.0])
            .filter(|l| l.class == LinkClass::Main)
            .map(|l| l.dst)
            .collect()
    }

    /// Number of main-link hops between two routers.
    pub fn router_hops(&self, a: NodeId, b: NodeId) -> Option<usize> {
        if a == b {
            return Some(0);
        }
        let mut dist = vec![usize::MAX; self.nodes.len()];
        let mut queue = VecDeque::from([a]);
        dist[a.0 as usize] = 0;
        while let Some(n) = queue.pop_front() {
            for m in self.router_neighbours(n) {
                if dist[m.0 as usize] == usize::MAX {
                    dist[m.0 as usize] = dist[n.0 as usize] + 1;
                    if m == b {
                        return Some(dist[m.0 as usize]);
                    }
                    queue.push_back(m);
                }
            }
        }
        None
    }

    /// Routers in path order, starting from the lowest-numbered end.
    pub fn router_chain(&self) -> Result<Vec<NodeId>> {
        if self.layout != Layout::Decentralised {
            return Err(TopologyError::WrongLayout {
                expected: Layout::Decentralised,
            });
        }
        let routers = self.routers();
        let Some(&start) = routers
            .iter()
            .find(|&&r| self.router_neighbours(r).len() <= 1)
        else {
            return Err(TopologyError::Invalid("router graph is not a path".into()));
        };
        let mut chain = vec![start];
        let mut prev: Option<NodeId> = None;
        let mut cur = start;
        loop {
            let next = self
                .router_neighbours(cur)
                .into_iter()
                .filter(|&n| Some(n) != prev)
                .min();
            match next {
                Some(n) => {
                    prev = Some(cur);
                    cur = n;
                    chain.push(n);
                }
                None => break,
            }
        }
        Ok(chain)
    }

    /// Hub router of a centralised network.
    pub fn root_router(&self) -> Result<NodeId> {
        if self.layout != Layout::Centralised {
            return Err(TopologyError::WrongLayout {
                expected: Layout::Centralised,
            });
        }
        let routers = self.routers();
        if routers.len() == 1 {
            return Ok(routers[0]);
        }
        routers
            .iter()
            .copied()
            .find(|&r| self.router_neighbours(r).len() == routers.len() - 1)
            .ok_or_else(|| TopologyError::Invalid("no root router".into()))
    }

    /// Unique shortest path by hop count. Leaves never act as transit.
    pub fn route(&self, src: NodeId, dst: NodeId) -> Result<Route> {
        self.node(src)?;
        self.node(dst)?;
        if src == dst {
            return Err(TopologyError::SameEndpoints(src));
        }
        let n = self.nodes.len();
        let mut via: Vec<Option<LinkId>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[src.0 as usize] = true;
        let mut queue = VecDeque::from([src]);
        while let Some(node) = queue.pop_front() {
            if node == dst {
                break;
            }
            if node != src && self.nodes[node.0 as usize].kind != NodeKind::Router {
                continue;
            }
            for &l in &self.egress[node.0 as usize] {
                let next = self.links[l.0].dst;
                if !seen[next.0 as usize] {
                    seen[next.0 as usize] = true;
                    via[next.0 as usize] = Some(l);
                    queue.push_back(next);
                }
            }
        }
        if !seen[dst.0 as usize] {
            return Err(TopologyError::Unreachable { from: src, to: dst });
        }
        let mut links = Vec::new();
        let mut cur = dst;
        while cur != src {
            let l = via[cur.0 as usize].expect("visited node has a predecessor");
            links.push(l);
            cur = self.links[l.0].src;
        }
        links.reverse();
        Ok(Route { links })
    }

    /// Cut a router chain at `router`. Leaves of `router` belong to neither side.
    pub fn split_at_router(&self, router: NodeId) -> Result<Split> {
        if self.kind(router)? != NodeKind::Router {
            return Err(TopologyError::NotARouter(router));
        }
        let chain = self.router_chain()?;
        let pos = chain
            .iter()
            .position(|&r| r == router)
            .expect("router is on the chain");
        let side = |routers: &[NodeId]| -> BTreeSet<NodeId> {
            let mut set = BTreeSet::new();
            for &r in routers {
                set.insert(r);
                for &l in self.egress(r) {
                    let link = &self.links[l.0];
                    if link.class == LinkClass::Sub {
                        set.insert(link.dst);
                    }
                }
            }
            set
        };
        Ok(Split {
            left: side(&chain[..pos]),
            right: side(&chain[pos + 1..]),
        })
    }

    pub fn set_queue_capacity(&mut self, link: LinkId, capacity: usize) -> Result<()> {
        if capacity == 0 {
            return Err(TopologyError::InvalidLink(
                "queue capacity must be >= 1".into(),
            ));
        }
        let l = self
            .links
            .get_mut(link.0)
            .ok_or(TopologyError::UnknownLink(link))?;
        l.queue_capacity = capacity;
        Ok(())
    }
}

/// Incremental construction with validation on `build`.
#[derive(Debug)]
pub struct NetworkBuilder {
    nodes: Vec<Node>,
    links: Vec<Link>,
    layout: Layout,
    params: LinkParams,
}

impl NetworkBuilder {
    pub fn new(layout: Layout, params: LinkParams) -> Self {
        NetworkBuilder {
            nodes: Vec::new(),
            links: Vec::new(),
            layout,
            params,
        }
    }

    fn add_node(&mut self, kind: NodeKind, name: impl Into<String>) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            id,
            kind,
            name: name.into(),
        });
        id
    }

    fn add_duplex(&mut self, a: NodeId, b: NodeId, class: LinkClass) {
        let bandwidth_bps = match class {
            LinkClass::Main => self.params.main_bps,
            LinkClass::Sub => self.params.sub_bps,
        };
        for (src, dst) in [(a, b), (b, a)] {
            let id = LinkId(self.links.len());
            self.links.push(Link {
                id,
                src,
                dst,
                bandwidth_bps,
                delay: self.params.delay,
                queue_capacity: self.params.queue_capacity,
                class,
            });
        }
    }

    pub fn router(&mut self, name: impl Into<String>) -> NodeId {
        self.add_node(NodeKind::Router, name)
    }

    pub fn client(&mut self, name: impl Into<String>, router: NodeId) -> NodeId {
        let id = self.add_node(NodeKind::Client, name);
        self.add_duplex(router, id, LinkClass::Sub);
        id
    }

    pub fn service(&mut self, name: impl Into<String>, router: NodeId) -> NodeId {
        let id = self.add_node(NodeKind::Service, name);
        self.add_duplex(router, id, LinkClass::Sub);
        id
    }

    pub fn connect(&mut self, a: NodeId, b: NodeId) {
        self.add_duplex(a, b, LinkClass::Main);
    }

    pub fn build(self) -> Result<Network> {
        let p = self.params;
        if p.main_bps == 0 || p.sub_bps == 0 {
            return Err(TopologyError::InvalidLink("bandwidth must be > 0".into()));
        }
        if p.queue_capacity == 0 {
            return Err(TopologyError::InvalidLink(
                "queue capacity must be >= 1".into(),
            ));
        }
        let mut egress = vec![Vec::new(); self.nodes.len()];
        for l in &self.links {
            egress[l.src.0 as usize].push(l.id);
        }
        let net = Network {
            nodes: self.nodes,
            links: self.links,
            egress,
            layout: self.layout,
        };
        net.validate()?;
        Ok(net)
    }
}

impl Network {
    fn validate(&self) -> Result<()> {
        let routers = self.routers();
        if routers.is_empty() {
            return Err(TopologyError::Invalid("no routers".into()));
        }
        for node in &self.nodes {
            let out = self.egress(node.id);
            match node.kind {
                NodeKind::Router => {
                    for &l in out {
                        let link = self.link(l);
                        let dst_kind = self.nodes[link.dst.0 as usize].kind;
                        let ok = match link.class {
                            LinkClass::Main => dst_kind == NodeKind::Router,
                            LinkClass::Sub => dst_kind != NodeKind::Router,
                        };
                        if !ok {
                            return Err(TopologyError::Invalid(format!(
                                "link class mismatch at {}",
                                node.name
                            )));
                        }
                    }
                }
                _ => {
                    if out.len() != 1 {
                        return Err(TopologyError::Invalid(format!(
                            "{} must attach to exactly one router",
                            node.name
                        )));
                    }
                }
            }
        }
        let main_links = self
            .links
            .iter()
            .filter(|l| l.class == LinkClass::Main)
            .count()
            / 2;
        if main_links + 1 != routers.len() {
            return Err(TopologyError::Invalid("router graph must be a tree".into()));
        }
        // connectivity over routers
        let first = routers[0];
        if routers
            .iter()
            .any(|&r| self.router_hops(first, r).is_none())
        {
            return Err(TopologyError::Invalid(
                "router graph is disconnected".into(),
            ));
        }
        match self.layout {
            Layout::Decentralised => {
                if routers.iter().any(|&r| self.router_neighbours(r).len() > 2) {
                    return Err(TopologyError::Invalid(
                        "decentralised routers must form a path".into(),
                    ));
                }
            }
            Layout::Centralised => {
                self.root_router()?;
            }
        }
        Ok(())
    }
}

/// Reference network: four routers R0..R3, three services on each of R0, R1
/// and R3, and `clients` clients on R2. The centralised variant adds a hub R4.
pub fn reference_network(layout: Layout, clients: usize) -> Network {
    reference_network_with(layout, clients, LinkParams::default())
}

pub fn reference_network_with(layout: Layout, clients: usize, params: LinkParams) -> Network {
    assert!(clients >= 1, "reference network needs at least one client");
    let mut b = NetworkBuilder::new(layout, params);
    let r: Vec<NodeId> = (0..4).map(|i| b.router(format!("R{i}"))).collect();
    match layout {
        Layout::Decentralised => {
            for w in r.windows(2) {
                b.connect(w[0], w[1]);
            }
        }
        Layout::Centralised => {
            let root = b.router("R4");
            for &ri in &r {
                b.connect(ri, root);
            }
        }
    }
    let mut s = 0;
    for &ri in &[r[0], r[1], r[3]] {
        for _ in 0..3 {
            b.service(format!("S{s}"), ri);
            s += 1;
        }
    }
    for c in 0..clients {
        b.client(format!("C{c}"), r[2]);
    }
    b.build().expect("reference network is valid")
}
