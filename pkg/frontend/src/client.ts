/**
 * Thin WebSocket wrapper: JSON in, JSON out, callbacks for the session.
 * Kept separate so the view logic can be tested with a fake transport.
 */

import { ClientMessage } from "./protocol.js";

export interface Transport {
  send(msg: ClientMessage): void;
  close(): void;
}

export function connectWebSocket(
  url: string,
  onMessage: (raw: string) => void,
  onClose: () => void,
): Transport {
  const socket = new WebSocket(url);
  socket.onmessage = (event) => onMessage(String(event.data));
  socket.onclose = onClose;
  socket.onerror = onClose;
  return {
    send(msg: ClientMessage): void {
      if (socket.readyState === WebSocket.OPEN) {
        socket.send(JSON.stringify(msg));
      }
    },
    close(): void {
      socket.close();
    },
  };
}
