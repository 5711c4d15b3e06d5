// SMT-LIB2 evaluation adapter around the z3-solver npm package (Z3 built to
// WebAssembly).  Two modes:
//
//   node adapter.js --oneshot   read one script on stdin until EOF, print the
//                               solver output, exit.  This is a plain
//                               SMT-LIB2-over-stdio solver command.
//
//   node adapter.js --server    line protocol: each request is one line of
//                               base64-encoded script; each response is one
//                               line of JSON {"out": ..., "err": ...}.  Every
//                               request is evaluated in a fresh solver
//                               context.  Prints "ready" once initialized.
//
// The package is resolved normally or via NODE_PATH (e.g. `npm root -g`).

'use strict';

function loadZ3() {
  try {
    return require('z3-solver');
  } catch (err) {
    process.stderr.write(
      'cannot load the z3-solver npm package: ' + err.message + '\n' +
      'install it with `npm install -g z3-solver` or point NODE_PATH at it\n');
    process.exit(3);
  }
}

async function evalScript(Z3, script) {
  // Options like :timeout are global in Z3; reset so queries stay isolated.
  try { Z3.global_param_reset_all(); } catch (_) { /* older builds lack it */ }
  const cfg = Z3.mk_config();
  const ctx = Z3.mk_context(cfg);
  Z3.del_config(cfg);
  try {
    return await Z3.eval_smtlib2_string(ctx, script);
  } finally {
    try { Z3.del_context(ctx); } catch (_) { /* context already gone */ }
  }
}

async function oneshot() {
  const chunks = [];
  process.stdin.on('data', (c) => chunks.push(c));
  process.stdin.on('end', async () => {
    const script = Buffer.concat(chunks).toString('utf8');
    const { init } = loadZ3();
    const { Z3 } = await init();
    try {
      const out = await evalScript(Z3, script);
      process.stdout.write(out.endsWith('\n') || out === '' ? out : out + '\n');
      process.exit(0);
    } catch (err) {
      process.stderr.write(String(err && err.message ? err.message : err) + '\n');
      process.exit(1);
    }
  });
}

async function server() {
  const { init } = loadZ3();
  const { Z3 } = await init();
  const readline = require('readline');
  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  process.stdout.write('ready\n');
  const queue = [];
  let busy = false;
  async function pump() {
    if (busy) return;
    busy = true;
    while (queue.length > 0) {
      const line = queue.shift();
      if (!line.trim()) continue;
      let reply;
      try {
        const script = Buffer.from(line.trim(), 'base64').toString('utf8');
        const out = await evalScript(Z3, script);
        reply = { out: out, err: '' };
      } catch (err) {
        reply = { out: '', err: String(err && err.message ? err.message : err) };
      }
      process.stdout.write(JSON.stringify(reply) + '\n');
    }
    busy = false;
  }
  rl.on('line', (line) => { queue.push(line); pump(); });
  rl.on('close', () => process.exit(0));
}

if (process.argv.includes('--server')) {
  server();
} else {
  oneshot();
}
