//! TCP server. Each connection gets its own thread and [`Service`]. A
//! connection whose first bytes are `GET ` is upgraded to a WebSocket, where
//! every text or binary message carries one frame payload; anything else
//! speaks the length-delimited framing of [`crate::frame`].

use std::io::{self, BufReader, BufWriter};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::thread::{self, JoinHandle};

use log::{debug, info, warn};
use tungstenite::Message;

use crate::frame::{read_frame, write_frame, Frame, MAX_FRAME_LEN};
use crate::protocol::{ErrorCode, ServerMessage};
use crate::service::{Service, Shared};

pub const PORT_ENV: &str = "PURSUIT_PORT";
pub const DEFAULT_PORT: u16 = 7317;

/// The port from `PURSUIT_PORT`, or the default when unset.
pub fn port_from_env() -> Result<u16, String> {
    match std::env::var(PORT_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| format!("{PORT_ENV}={v:?} is not a port number")),
        Err(_) => Ok(DEFAULT_PORT),
    }
}

pub struct Server {
    listener: TcpListener,
    shared: Shared,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, shared: Shared) -> io::Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            shared,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until the listener fails.
    pub fn run(self) -> io::Result<()> {
        info!("listening on {}", self.local_addr()?);
        for stream in self.listener.incoming() {
            let stream = stream?;
            let shared = self.shared.clone();
            thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                if let Err(e) = serve_connection(stream, shared) {
                    debug!("connection {peer:?} closed: {e}");
                }
            });
        }
        Ok(())
    }

    /// Runs the accept loop on a background thread.
    pub fn spawn(self) -> JoinHandle<io::Result<()>> {
        thread::spawn(move || self.run())
    }
}

fn serve_connection(stream: TcpStream, shared: Shared) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut head = [0u8; 4];
    let mut seen = 0;
    // peek until four bytes are buffered or the peer stops sending
    while seen < 4 {
        let n = stream.peek(&mut head)?;
        if n == 0 || n == seen {
            break;
        }
        seen = n;
    }
    let service = Service::new(shared);
    if &head[..seen] == b"GET " {
        serve_websocket(stream, service)
    } else {
        serve_framed(stream, service)
    }
}

fn serve_framed(stream: TcpStream, mut service: Service) -> io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    while let Some(frame) = read_frame(&mut reader)? {
        let replies = match frame {
            Frame::Payload(p) => service.handle_frame(&p),
            Frame::Oversized(n) => vec![ServerMessage::error(
                ErrorCode::MalformedFrame,
                format!("frame of {n} bytes exceeds {MAX_FRAME_LEN}"),
                None,
            )],
        };
        for reply in replies {
            write_frame(&mut writer, reply.to_json().as_bytes())?;
        }
    }
    Ok(())
}

fn serve_websocket(stream: TcpStream, mut service: Service) -> io::Result<()> {
    let mut ws = tungstenite::accept(stream).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
    loop {
        let payload = match ws.read() {
            Ok(Message::Text(t)) => t.into_bytes(),
            Ok(Message::Binary(b)) => b,
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => continue,
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(e) => {
                warn!("websocket error: {e}");
                return Err(io::Error::new(io::ErrorKind::InvalidData, e.to_string()));
            }
        };
        for reply in service.handle_frame(&payload) {
            ws.send(Message::Text(reply.to_json()))
                .map_err(|e| io::Error::new(io::ErrorKind::BrokenPipe, e.to_string()))?;
        }
    }
}
