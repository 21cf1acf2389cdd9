/**
 * Thin client for the segbench newline-delimited JSON evaluation protocol.
 *
 * Each request writes exactly one line and reads exactly one line; the
 * server guarantees sequential in-order processing, so the client keeps a
 * simple FIFO of pending replies. Two transports are provided: a spawned
 * subprocess speaking the protocol on stdio, and a TCP connection.
 */
import { spawn, type ChildProcessByStdio } from "node:child_process";
import * as net from "node:net";
import type { Readable, Writable } from "node:stream";

export class ProtocolError extends Error {}

/** One or more genotype rows were rejected by the server. */
export class InvalidGenotypeError extends Error {
  constructor(public readonly indices: number[]) {
    super(`invalid genotype rows: ${indices.join(", ")}`);
  }
}

export interface ProblemSettings {
  problem: number;
  D: number;
  M: number;
  lower: number[];
  upper: number[];
  objectives: string[];
  populationSize: number;
}

export interface Transport {
  request(line: string): Promise<string>;
  close(): void;
}

/** Splits an incoming byte stream into lines and hands each to a waiter. */
class LineQueue {
  private buffer = "";
  private lines: string[] = [];
  private waiters: Array<{
    resolve: (line: string) => void;
    reject: (err: Error) => void;
  }> = [];
  private failure: Error | null = null;

  push(chunk: string): void {
    this.buffer += chunk;
    let idx: number;
    while ((idx = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, idx);
      this.buffer = this.buffer.slice(idx + 1);
      const waiter = this.waiters.shift();
      if (waiter) {
        waiter.resolve(line);
      } else {
        this.lines.push(line);
      }
    }
  }

  fail(err: Error): void {
    if (this.failure) return;
    this.failure = err;
    for (const waiter of this.waiters.splice(0)) {
      waiter.reject(err);
    }
  }

  next(): Promise<string> {
    const ready = this.lines.shift();
    if (ready !== undefined) return Promise.resolve(ready);
    if (this.failure) return Promise.reject(this.failure);
    return new Promise((resolve, reject) => {
      this.waiters.push({ resolve, reject });
    });
  }
}

/** Serializes requests so replies are matched strictly in order. */
abstract class SequentialTransport implements Transport {
  protected readonly queue = new LineQueue();
  private chain: Promise<unknown> = Promise.resolve();

  protected abstract writeLine(line: string): void;
  abstract close(): void;

  request(line: string): Promise<string> {
    const reply = this.chain.then(() => {
      this.writeLine(line + "\n");
      return this.queue.next();
    });
    this.chain = reply.catch(() => undefined);
    return reply;
  }
}

/** Protocol endpoint reached by spawning a server subprocess on stdio. */
export class StdioTransport extends SequentialTransport {
  private readonly child: ChildProcessByStdio<Writable, Readable, null>;

  constructor(command: string, args: string[]) {
    super();
    this.child = spawn(command, args, { stdio: ["pipe", "pipe", "inherit"] });
    this.child.stdout.setEncoding("utf-8");
    this.child.stdout.on("data", (chunk: string) => this.queue.push(chunk));
    this.child.on("error", (err) => this.queue.fail(err));
    this.child.on("exit", () =>
      this.queue.fail(new ProtocolError("server process exited")),
    );
  }

  protected writeLine(line: string): void {
    this.child.stdin.write(line);
  }

  close(): void {
    this.child.stdin.end();
    this.child.kill();
  }
}

/** Protocol endpoint over a TCP connection. */
export class TcpTransport extends SequentialTransport {
  private constructor(private readonly socket: net.Socket) {
    super();
    socket.setEncoding("utf-8");
    socket.on("data", (chunk: string) => this.queue.push(chunk));
    socket.on("error", (err) => this.queue.fail(err));
    socket.on("close", () => this.queue.fail(new ProtocolError("connection closed")));
  }

  static connect(host: string, port: number): Promise<TcpTransport> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port }, () =>
        resolve(new TcpTransport(socket)),
      );
      socket.once("error", reject);
    });
  }

  protected writeLine(line: string): void {
    this.socket.write(line);
  }

  close(): void {
    this.socket.destroy();
  }
}

function asReply(line: string): Record<string, unknown> {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch {
    throw new ProtocolError(`unparseable server reply: ${line}`);
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new ProtocolError(`server reply is not an object: ${line}`);
  }
  return parsed as Record<string, unknown>;
}

/**
 * One benchmark problem served remotely. Settings are fetched once during
 * connect() and cached immutably for the session.
 */
export class RemoteProblem {
  private constructor(
    private readonly transport: Transport,
    public readonly settings: ProblemSettings,
  ) {}

  static async connect(transport: Transport, problem: number): Promise<RemoteProblem> {
    const reply = asReply(
      await transport.request(JSON.stringify({ op: "settings", problem })),
    );
    if (typeof reply.error === "string") {
      throw new ProtocolError(`settings request failed: ${reply.error}`);
    }
    for (const key of ["problem", "D", "M", "population_size"]) {
      if (typeof reply[key] !== "number") {
        throw new ProtocolError(`settings reply missing numeric "${key}"`);
      }
    }
    if (!Array.isArray(reply.lower) || !Array.isArray(reply.upper) ||
        !Array.isArray(reply.objectives)) {
      throw new ProtocolError("settings reply missing bounds or objectives");
    }
    return new RemoteProblem(transport, {
      problem: reply.problem as number,
      D: reply.D as number,
      M: reply.M as number,
      lower: reply.lower as number[],
      upper: reply.upper as number[],
      objectives: reply.objectives as string[],
      populationSize: reply.population_size as number,
    });
  }

  /**
   * Evaluate a batch of genotypes; returns an |X| x M objective matrix with
   * the server's values passed through untouched.
   */
  async evaluate(X: number[][], seed = 0, raw = false): Promise<number[][]> {
    const { D, M, problem } = this.settings;
    for (const [i, row] of X.entries()) {
      if (row.length !== D) {
        throw new RangeError(`row ${i} has length ${row.length}, expected ${D}`);
      }
    }
    const reply = asReply(
      await this.transport.request(
        JSON.stringify({ op: "evaluate", problem, X, seed, raw }),
      ),
    );
    if (Array.isArray(reply.errors)) {
      const indices = (reply.errors as Array<{ index: number }>).map((e) => e.index);
      throw new InvalidGenotypeError(indices);
    }
    if (typeof reply.error === "string") {
      throw new ProtocolError(`evaluate request failed: ${reply.error}`);
    }
    const F = reply.F;
    if (!Array.isArray(F) || F.length !== X.length ||
        F.some((r) => !Array.isArray(r) || r.length !== M)) {
      throw new ProtocolError("evaluate reply has the wrong shape");
    }
    return F as number[][];
  }

  close(): void {
    this.transport.close();
  }
}
