//! Browser bindings: build a pencil, classify its square, run the
//! Sturm-Liouville demo. Results come back as JSON strings.

mod workbench;

use wasm_bindgen::prelude::*;

pub use workbench::{sturm_json, Session};

#[wasm_bindgen]
pub struct Workbench {
    inner: Session,
}

#[wasm_bindgen]
impl Workbench {
    /// `coords` like `"x:even, xi:odd"`, `s` rows separated by `;` and
    /// entries by `,`, `gamma` entries separated by `,`.
    #[wasm_bindgen(constructor)]
    pub fn new(
        coords: &str,
        lambda: &str,
        parity: &str,
        s: &str,
        gamma: &str,
        theta: &str,
    ) -> Result<Workbench, JsError> {
        Session::parse(coords, lambda, parity, s, gamma, theta)
            .map(|inner| Workbench { inner })
            .map_err(|e| JsError::new(&e))
    }

    /// The pencil and its member at weight `w`.
    pub fn pencil(&self, w: &str) -> Result<String, JsError> {
        self.inner.pencil_json(w).map_err(|e| JsError::new(&e))
    }

    /// Jacobi residuals and the order of `Delta^2`.
    pub fn square(&self) -> Result<String, JsError> {
        self.inner.square_json().map_err(|e| JsError::new(&e))
    }
}

/// Weight-two data `d^2 + ..` on the line `x` under `y = change(x)`.
#[wasm_bindgen]
pub fn sturm(gamma: &str, theta: &str, change: &str) -> Result<String, JsError> {
    sturm_json(gamma, theta, change).map_err(|e| JsError::new(&e))
}
