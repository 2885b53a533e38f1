use std::sync::Arc;

use crate::point::{Layout, Point};
use crate::problem::{BilevelProblem, Constants, Domain, InstanceMetadata};

type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;

/// A problem assembled from closures over one of the shipped domains.
#[derive(Clone)]
pub struct CustomProblem {
    name: String,
    layout: Layout,
    domain: Domain,
    x0: Point,
    f: ScalarFn,
    grad_f: GradFn,
    g: ScalarFn,
    grad_g: GradFn,
    lf: f64,
    lg: f64,
    metadata: InstanceMetadata,
    projection: bool,
}

impl CustomProblem {
    /// Starts with `f = g = 0` and unit smoothness constants.
    pub fn new(name: impl Into<String>, domain: Domain, x0: Point) -> Self {
        let layout = x0.layout();
        CustomProblem {
            name: name.into(),
            layout,
            domain,
            x0,
            f: Arc::new(|_| 0.0),
            grad_f: Arc::new(move |x: &Point| Point::zeros(x.layout())),
            g: Arc::new(|_| 0.0),
            grad_g: Arc::new(move |x: &Point| Point::zeros(x.layout())),
            lf: 1.0,
            lg: 1.0,
            metadata: InstanceMetadata::default(),
            projection: true,
        }
    }

    pub fn outer(
        mut self,
        f: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        grad_f: impl Fn(&Point) -> Point + Send + Sync + 'static,
        lf: f64,
    ) -> Self {
        self.f = Arc::new(f);
        self.grad_f = Arc::new(grad_f);
        self.lf = lf;
        self
    }

    pub fn inner(
        mut self,
        g: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        grad_g: impl Fn(&Point) -> Point + Send + Sync + 'static,
        lg: f64,
    ) -> Self {
        self.g = Arc::new(g);
        self.grad_g = Arc::new(grad_g);
        self.lg = lg;
        self
    }

    pub fn with_metadata(mut self, metadata: InstanceMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn without_projection(mut self) -> Self {
        self.projection = false;
        self
    }
}

impl BilevelProblem for CustomProblem {
    fn name(&self) -> &str {
        &self.name
    }
    fn layout(&self) -> Layout {
        self.layout
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn f(&self, x: &Point) -> f64 {
        (self.f)(x)
    }
    fn grad_f(&self, x: &Point) -> Point {
        (self.grad_f)(x)
    }
    fn g(&self, x: &Point) -> f64 {
        (self.g)(x)
    }
    fn grad_g(&self, x: &Point) -> Point {
        (self.grad_g)(x)
    }
    fn constants(&self) -> Constants {
        Constants {
            lf: self.lf,
            lg: self.lg,
            diameter: self.domain.diameter(),
        }
    }
    fn metadata(&self) -> &InstanceMetadata {
        &self.metadata
    }
    fn initial_point(&self) -> Point {
        self.x0.clone()
    }
    fn has_projection(&self) -> bool {
        self.projection
    }
}
