//! Read-only HTTP query endpoint.
//!
//! `GET /query?q=<pattern>` answers with CSV solutions, `GET /health` with 200.

use std::collections::HashMap;
use std::io;
use std::net::{SocketAddr, TcpListener};
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use heritage_core::store::{parse_bgp, solutions_csv, Store};
use tokio::sync::oneshot;

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/query", get(query))
        .route("/health", get(|| async { "ok\n" }))
        .with_state(store)
}

async fn query(
    State(store): State<Arc<Store>>,
    Query(params): Query<HashMap<String, String>>,
) -> Response {
    let Some(text) = params.get("q") else {
        return (StatusCode::BAD_REQUEST, "missing parameter q\n").into_response();
    };
    match parse_bgp(text) {
        Ok(patterns) => {
            let body = solutions_csv(&patterns, &store.bgp_query(&patterns));
            ([(header::CONTENT_TYPE, "text/csv")], body).into_response()
        }
        Err(e) => (StatusCode::BAD_REQUEST, format!("{e}\n")).into_response(),
    }
}

/// A server running on a background thread; stops when dropped.
pub struct Server {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl Server {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the server stops.
    pub fn wait(mut self) -> io::Result<()> {
        let thread = self.thread.take().expect("joined once");
        thread
            .join()
            .unwrap_or_else(|_| Err(io::Error::other("server thread panicked")))
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}

/// Binds `127.0.0.1:port` (0 picks a free port) and serves `store`.
pub fn start(store: Store, port: u16) -> io::Result<Server> {
    let listener = TcpListener::bind(("127.0.0.1", port))?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    let (tx, rx) = oneshot::channel::<()>();
    let app = router(Arc::new(store));
    let thread = std::thread::spawn(move || {
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener)?;
            axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await
        })
    });
    Ok(Server {
        addr,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}
