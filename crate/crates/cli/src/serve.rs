use std::io::{ErrorKind, Write};

use anyhow::{bail, Context, Result};
use vigen_core::engine::AnimationParams;
use vigen_gateway::{Gateway, GatewayConfig, SessionSetup};

use crate::bundle::Bundle;
use crate::ServeArgs;

pub fn run(args: ServeArgs) -> Result<()> {
    let Bundle { db, steps, lexicon, extractor } = Bundle::load(&args.session)?;
    let gateway = Gateway::new(GatewayConfig::default());
    gateway
        .initialize(SessionSetup { db, steps, lexicon, extractor, params: AnimationParams::default() })
        .expect("fresh gateway");

    let runtime = tokio::runtime::Runtime::new().context("cannot start async runtime")?;
    runtime.block_on(async move {
        let listener = match tokio::net::TcpListener::bind((args.host.as_str(), args.port)).await {
            Ok(l) => l,
            Err(e) if e.kind() == ErrorKind::AddrInUse => bail!("port {} is already in use", args.port),
            Err(e) => bail!("cannot listen on {}:{}: {e}", args.host, args.port),
        };
        let port = listener.local_addr()?.port();
        println!("listening on :{port}");
        std::io::stdout().flush()?;
        vigen_gateway::serve(listener, gateway, shutdown_signal()).await?;
        println!("shut down");
        Ok(())
    })
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        let mut term = signal(SignalKind::terminate()).expect("install SIGTERM handler");
        tokio::select! {
            _ = tokio::signal::ctrl_c() => {}
            _ = term.recv() => {}
        }
    }
    #[cfg(not(unix))]
    let _ = tokio::signal::ctrl_c().await;
}
