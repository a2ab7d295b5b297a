//! A blocking client for the length-delimited transport.

use std::io::{self, BufReader, BufWriter};
use std::net::{TcpStream, ToSocketAddrs};

use serde_json::Value;

use crate::frame::{read_frame, write_frame, Frame};
use crate::protocol::ClientMessage;

pub struct Client {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl Client {
    pub fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Self {
            reader: BufReader::new(stream.try_clone()?),
            writer: BufWriter::new(stream),
        })
    }

    pub fn send(&mut self, msg: &ClientMessage) -> io::Result<()> {
        self.send_raw(msg.to_json().to_string().as_bytes())
    }

    pub fn send_raw(&mut self, payload: &[u8]) -> io::Result<()> {
        write_frame(&mut self.writer, payload)
    }

    /// The next reply as text.
    pub fn recv_text(&mut self) -> io::Result<String> {
        next_text(&mut self.reader)
    }

    pub fn recv(&mut self) -> io::Result<Value> {
        let text = self.recv_text()?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    /// Sends `msgs` followed by a `hello`, and returns every reply up to the
    /// `hello_ok`. Replies on one connection arrive in request order.
    pub fn exchange(&mut self, msgs: &[ClientMessage]) -> io::Result<Vec<String>> {
        let Self { reader, writer } = self;
        std::thread::scope(|scope| {
            // write from a second thread so a full reply buffer cannot stall both ends
            let sender = scope.spawn(move || -> io::Result<()> {
                for m in msgs {
                    write_frame(writer, m.to_json().to_string().as_bytes())?;
                }
                write_frame(writer, ClientMessage::Hello { client: None }.to_json().to_string().as_bytes())
            });
            let mut out = Vec::new();
            let result = loop {
                let text = match next_text(reader) {
                    Ok(t) => t,
                    Err(e) => break Err(e),
                };
                if serde_json::from_str::<Value>(&text).is_ok_and(|v| v["type"] == "hello_ok") {
                    break Ok(out);
                }
                out.push(text);
            };
            sender.join().expect("sender thread panicked")?;
            result
        })
    }
}

fn next_text(reader: &mut BufReader<TcpStream>) -> io::Result<String> {
    match read_frame(reader)? {
        Some(Frame::Payload(p)) => String::from_utf8(p).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
        Some(Frame::Oversized(n)) => Err(io::Error::new(io::ErrorKind::InvalidData, format!("{n} byte reply"))),
        None => Err(io::ErrorKind::UnexpectedEof.into()),
    }
}
