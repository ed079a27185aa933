#include <algorithm>

#include "coopcheck/canonical.hpp"

namespace coopcheck {

namespace {

struct ByteSink {
  std::string out;

  void u8(uint8_t v) { out.push_back(static_cast<char>(v)); }
  void i32(int32_t v) {
    for (int i = 0; i < 4; i++) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void i64(int64_t v) {
    for (int i = 0; i < 8; i++) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void str(const std::string& s) {
    i32(static_cast<int32_t>(s.size()));
    out += s;
  }
};

struct Renumbering {
  std::vector<int> proc_map;  // original pid -> canonical pid
  std::vector<int> proc_order;
  std::vector<int> obj_map;  // original oid -> canonical oid
  std::vector<int> obj_order;

  int mp(int pid) const { return pid < 0 ? -1 : proc_map[pid]; }
  int mo(int oid) const { return oid < 0 ? -1 : obj_map[oid]; }
};

Renumbering renumber(const Configuration& cfg) {
  Renumbering r;
  r.proc_map.assign(cfg.processors.size(), -1);
  r.obj_map.assign(cfg.objects.size(), -1);

  for (int pid = cfg.first_processor; pid >= 0; pid = cfg.proc(pid).list_next) {
    r.proc_map[pid] = static_cast<int>(r.proc_order.size());
    r.proc_order.push_back(pid);
  }

  auto touch_obj = [&](int oid) {
    if (oid >= 0 && r.obj_map[oid] < 0) {
      r.obj_map[oid] = static_cast<int>(r.obj_order.size());
      r.obj_order.push_back(oid);
    }
  };
  auto touch_value = [&](const Value& v) {
    if (v.kind == ValueKind::ref_v) touch_obj(v.oid);
  };
  auto touch_frame = [&](const Frame& f) {
    touch_obj(f.current_object);
    for (const auto& v : f.formals) touch_value(v);
    for (const auto& v : f.locals) touch_value(v);
    touch_value(f.result);
    for (const auto& v : f.eval_memo) touch_value(v);
  };
  // Expands the object graph from every object numbered so far, slots in
  // template order.
  size_t closure_cursor = 0;
  auto expand = [&]() {
    while (closure_cursor < r.obj_order.size()) {
      const ObjectInstance& obj = cfg.obj(r.obj_order[closure_cursor++]);
      for (const auto& v : obj.slots) touch_value(v);
    }
  };

  for (int pid : r.proc_order) {
    const Processor& p = cfg.proc(pid);
    for (auto it = p.stack.rbegin(); it != p.stack.rend(); ++it) touch_frame(*it);
    expand();
    for (const auto& req : p.queue) touch_frame(req.frame);
    expand();
  }

  // Objects no longer reachable keep a stable order: handler first, then
  // original id.
  std::vector<int> orphans;
  for (size_t oid = 0; oid < cfg.objects.size(); oid++)
    if (r.obj_map[oid] < 0) orphans.push_back(static_cast<int>(oid));
  std::sort(orphans.begin(), orphans.end(), [&](int a, int b) {
    int ha = r.mp(cfg.obj(a).handler), hb = r.mp(cfg.obj(b).handler);
    return ha != hb ? ha < hb : a < b;
  });
  for (int oid : orphans) touch_obj(oid);

  return r;
}

void write_value(ByteSink& sink, const Renumbering& r, const Value& v) {
  sink.u8(static_cast<uint8_t>(v.kind));
  switch (v.kind) {
    case ValueKind::int_v: sink.i64(v.ival); break;
    case ValueKind::bool_v: sink.u8(v.bval ? 1 : 0); break;
    case ValueKind::ref_v: sink.i32(r.mo(v.oid)); break;
  }
}

void write_pid_set(ByteSink& sink, const Renumbering& r,
                   const std::vector<int>& pids) {
  std::vector<int> mapped;
  mapped.reserve(pids.size());
  for (int pid : pids) mapped.push_back(r.mp(pid));
  std::sort(mapped.begin(), mapped.end());
  sink.i32(static_cast<int32_t>(mapped.size()));
  for (int pid : mapped) sink.i32(pid);
}

void write_frame(ByteSink& sink, const Renumbering& r, const Frame& f) {
  sink.i32(f.feature);
  sink.i32(r.mo(f.current_object));
  sink.i32(static_cast<int32_t>(f.formals.size()));
  for (const auto& v : f.formals) write_value(sink, r, v);
  sink.i32(static_cast<int32_t>(f.locals.size()));
  for (const auto& v : f.locals) write_value(sink, r, v);
  write_value(sink, r, f.result);
  sink.u8(static_cast<uint8_t>(f.return_kind));
  sink.i32(f.return_state);
  sink.i32(r.mp(f.reply_to));
  sink.u8(f.reply_expected ? 1 : 0);
  write_pid_set(sink, r, f.controls);
  sink.i32(r.mp(f.restore_to));
  write_pid_set(sink, r, f.passed_locks);
  write_pid_set(sink, r, f.entry_acquired);
  sink.i32(static_cast<int32_t>(f.eval_memo.size()));
  for (const auto& v : f.eval_memo) write_value(sink, r, v);
}

std::string serialize(const Configuration& cfg) {
  Renumbering r = renumber(cfg);
  ByteSink sink;

  sink.u8(cfg.options.token_mode ? 1 : 0);
  sink.u8(cfg.options.postconditions ? 1 : 0);
  sink.u8(cfg.action_executed_indicator ? 1 : 0);
  sink.u8(cfg.reset_token_flag ? 1 : 0);
  sink.i32(r.mp(cfg.first_processor));
  sink.i32(r.mp(cfg.last_processor));
  sink.u8(cfg.error ? 1 : 0);
  if (cfg.error) {
    sink.u8(static_cast<uint8_t>(cfg.error->cls));
    sink.i32(r.mp(cfg.error->proc));
    sink.i32(cfg.error->feature);
    sink.str(cfg.error->tag);
  }

  sink.i32(static_cast<int32_t>(r.proc_order.size()));
  for (int pid : r.proc_order) {
    const Processor& p = cfg.proc(pid);
    sink.u8(static_cast<uint8_t>(p.lock.kind));
    sink.i32(r.mp(p.lock.owner));
    sink.u8(static_cast<uint8_t>(p.status));
    sink.u8(p.has_token ? 1 : 0);
    sink.i32(r.mp(p.list_next));
    sink.i32(p.pos_feature);
    sink.i32(p.pos_state);
    write_pid_set(sink, r, p.wait_set);
    sink.i32(static_cast<int32_t>(p.stack.size()));
    for (const auto& frame : p.stack) write_frame(sink, r, frame);
    sink.i32(static_cast<int32_t>(p.queue.size()));
    for (const auto& req : p.queue) write_frame(sink, r, req.frame);
  }

  sink.i32(static_cast<int32_t>(r.obj_order.size()));
  for (int oid : r.obj_order) {
    const ObjectInstance& obj = cfg.obj(oid);
    sink.i32(obj.class_id);
    sink.i32(r.mp(obj.handler));
    sink.i32(static_cast<int32_t>(obj.slots.size()));
    for (const auto& v : obj.slots) write_value(sink, r, v);
  }
  return std::move(sink.out);
}

uint64_t fnv1a(const std::string& bytes, uint64_t seed) {
  uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

CanonicalKey canonical_key(const Configuration& config, bool keep_bytes) {
  std::string bytes = serialize(config);
  CanonicalKey key;
  key.lo = fnv1a(bytes, 14695981039346656037ULL);
  key.hi = fnv1a(bytes, 0x6c62272e07bb0142ULL);
  if (keep_bytes) key.bytes = std::move(bytes);
  return key;
}

std::string canonical_bytes(const Configuration& config) {
  return serialize(config);
}

}  // namespace coopcheck
