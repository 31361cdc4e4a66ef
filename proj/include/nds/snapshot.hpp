#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nds/errors.hpp"
#include "nds/ingest.hpp"
#include "nds/learner.hpp"

namespace nds {

// Learner state file: "NDSS" magic, version, learner tag, then named tensors.
// Every payload value travels as a little-endian 64-bit float; integer
// counters fit exactly well past any stream length this library produces.
inline constexpr char kSnapshotMagic[4] = {'N', 'D', 'S', 'S'};
inline constexpr std::uint16_t kSnapshotVersion = 1;

namespace detail {

struct Tensor {
    std::vector<std::uint64_t> dims;
    std::vector<double> data;
};

inline void put_f64_le(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_le(out, bits);
}

inline double get_f64_le(const unsigned char* p) {
    const std::uint64_t bits = get_le<std::uint64_t>(p);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline void put_tensor(std::string& out, const std::string& name, const Tensor& t) {
    put_le(out, static_cast<std::uint16_t>(name.size()));
    out.append(name);
    put_le(out, static_cast<std::uint8_t>(t.dims.size()));
    std::uint64_t count = 1;
    for (auto d : t.dims) {
        put_le(out, d);
        count *= d;
    }
    if (count != t.data.size())
        throw format_error("snapshot tensor '" + name + "': dims disagree with payload");
    for (double v : t.data) put_f64_le(out, v);
}

using TensorMap = std::map<std::string, Tensor>;

inline Tensor scalar(double v) { return Tensor{{}, {v}}; }

inline Tensor from_matrix(const Eigen::MatrixXd& m) {
    Tensor t;
    t.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    t.data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) t.data.push_back(m(r, c));
    return t;
}

inline Tensor from_vector_d(const Eigen::VectorXd& v) {
    Tensor t;
    t.dims = {static_cast<std::uint64_t>(v.size())};
    t.data.assign(v.data(), v.data() + v.size());
    return t;
}

template <typename T>
inline Tensor from_counts(const std::vector<T>& v) {
    Tensor t;
    t.dims = {static_cast<std::uint64_t>(v.size())};
    t.data.reserve(v.size());
    for (const auto& x : v) t.data.push_back(static_cast<double>(x));
    return t;
}

inline Eigen::MatrixXd to_matrix(const Tensor& t, const std::string& name) {
    if (t.dims.size() != 2)
        throw corruption_error("snapshot tensor '" + name + "': expected a matrix");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(t.dims[0]),
                      static_cast<Eigen::Index>(t.dims[1]));
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.data[k++];
    return m;
}

inline Eigen::VectorXd to_vector_d(const Tensor& t, const std::string& name) {
    if (t.dims.size() != 1)
        throw corruption_error("snapshot tensor '" + name + "': expected a vector");
    return Eigen::Map<const Eigen::VectorXd>(t.data.data(),
                                             static_cast<Eigen::Index>(t.data.size()));
}

inline const Tensor& need(const TensorMap& m, const std::string& name) {
    auto it = m.find(name);
    if (it == m.end())
        throw corruption_error("snapshot is missing tensor '" + name + "'");
    return it->second;
}

inline double need_scalar(const TensorMap& m, const std::string& name) {
    const Tensor& t = need(m, name);
    if (!t.dims.empty() || t.data.size() != 1)
        throw corruption_error("snapshot tensor '" + name + "': expected a scalar");
    return t.data[0];
}

inline void pack_head(TensorMap& out, const std::string& prefix, const AnyHead& head) {
    std::visit(
        [&](const auto& h) {
            using HeadT = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<HeadT, LinearHead>) {
                out[prefix + ".W"] = from_matrix(h.W);
                out[prefix + ".b"] = from_vector_d(h.b);
            } else {
                out[prefix + ".W1"] = from_matrix(h.W1);
                out[prefix + ".b1"] = from_vector_d(h.b1);
                out[prefix + ".W2"] = from_matrix(h.W2);
                out[prefix + ".b2"] = from_vector_d(h.b2);
            }
            out[prefix + ".steps"] = scalar(static_cast<double>(h.steps));
            out[prefix + ".lr"] = scalar(h.lr);
        },
        head);
}

inline AnyHead unpack_head(const TensorMap& m, const std::string& prefix) {
    AnyHead head;
    if (m.count(prefix + ".W1")) {
        TwoLayerHead h;
        h.W1 = to_matrix(need(m, prefix + ".W1"), prefix + ".W1");
        h.b1 = to_vector_d(need(m, prefix + ".b1"), prefix + ".b1");
        h.W2 = to_matrix(need(m, prefix + ".W2"), prefix + ".W2");
        h.b2 = to_vector_d(need(m, prefix + ".b2"), prefix + ".b2");
        h.steps = static_cast<std::uint64_t>(need_scalar(m, prefix + ".steps"));
        h.lr = need_scalar(m, prefix + ".lr");
        head = std::move(h);
    } else {
        LinearHead h;
        h.W = to_matrix(need(m, prefix + ".W"), prefix + ".W");
        h.b = to_vector_d(need(m, prefix + ".b"), prefix + ".b");
        h.steps = static_cast<std::uint64_t>(need_scalar(m, prefix + ".steps"));
        h.lr = need_scalar(m, prefix + ".lr");
        head = std::move(h);
    }
    return head;
}

inline void pack_samples(TensorMap& out, const std::string& prefix,
                         const std::vector<Sample>& samples, std::size_t d) {
    Tensor feats;
    feats.dims = {samples.size(), d};
    feats.data.reserve(samples.size() * d);
    Tensor labels, run_ids, ids;
    labels.dims = run_ids.dims = ids.dims = {samples.size()};
    for (const auto& s : samples) {
        if (s.features.size() != d)
            throw format_error("snapshot: sample feature length mismatch");
        for (float f : s.features) feats.data.push_back(static_cast<double>(f));
        labels.data.push_back(static_cast<double>(s.label));
        run_ids.data.push_back(static_cast<double>(s.run_id));
        ids.data.push_back(static_cast<double>(s.id));
    }
    out[prefix + ".features"] = std::move(feats);
    out[prefix + ".labels"] = std::move(labels);
    out[prefix + ".run_ids"] = std::move(run_ids);
    out[prefix + ".ids"] = std::move(ids);
}

inline std::vector<Sample> unpack_samples(const TensorMap& m, const std::string& prefix) {
    const Tensor& feats = need(m, prefix + ".features");
    if (feats.dims.size() != 2)
        throw corruption_error("snapshot tensor '" + prefix + ".features': expected a matrix");
    const std::size_t count = feats.dims[0];
    const std::size_t d = feats.dims[1];
    const Tensor& labels = need(m, prefix + ".labels");
    const Tensor& run_ids = need(m, prefix + ".run_ids");
    const Tensor& ids = need(m, prefix + ".ids");
    if (labels.data.size() != count || run_ids.data.size() != count ||
        ids.data.size() != count)
        throw corruption_error("snapshot sample block '" + prefix + "': length mismatch");
    std::vector<Sample> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i].id = static_cast<std::uint64_t>(ids.data[i]);
        out[i].label = static_cast<std::uint32_t>(labels.data[i]);
        out[i].run_id = static_cast<std::uint32_t>(run_ids.data[i]);
        out[i].features.resize(d);
        for (std::size_t j = 0; j < d; ++j)
            out[i].features[j] = static_cast<float>(feats.data[i * d + j]);
    }
    return out;
}

}  // namespace detail

struct LearnerSnapshot {
    Learner learner;
    std::optional<ReplayMemory> memory;
};

inline std::string encode_snapshot(const Learner& learner,
                                   const ReplayMemory* mem = nullptr) {
    detail::TensorMap tensors;
    const LearnerKind kind = learner_kind(learner);
    if (const auto* l = std::get_if<SgdLearner>(&learner)) {
        detail::pack_head(tensors, "head", l->head);
    } else if (const auto* l = std::get_if<LwfLearner>(&learner)) {
        detail::pack_head(tensors, "head", l->head);
        detail::pack_head(tensors, "teacher", l->teacher);
        tensors["seen"] = detail::scalar(static_cast<double>(l->experiences_seen));
    } else if (const auto* l = std::get_if<SldaLearner>(&learner)) {
        tensors["slda.mu"] = detail::from_matrix(l->state.mu);
        tensors["slda.n_c"] = detail::from_counts(l->state.n_c);
        tensors["slda.sigma"] = detail::from_matrix(l->state.sigma);
        tensors["slda.t"] = detail::scalar(static_cast<double>(l->state.t));
        tensors["slda.epsilon"] = detail::scalar(l->state.epsilon);
        tensors["slda.plastic"] = detail::scalar(l->state.plastic ? 1.0 : 0.0);
        tensors["slda.base_left"] = detail::scalar(static_cast<double>(l->base_left));
        if (!l->base_buffer.empty())
            detail::pack_samples(tensors, "slda.base", l->base_buffer,
                                 static_cast<std::size_t>(l->state.mu.cols()));
    } else {
        const auto& ex = std::get<ExStreamLearner>(learner);
        detail::pack_head(tensors, "head", ex.head);
        tensors["proto.capacity"] =
            detail::scalar(static_cast<double>(ex.buffers.capacity));
        tensors["proto.classes"] =
            detail::scalar(static_cast<double>(ex.buffers.per_class.size()));
        for (std::size_t c = 0; c < ex.buffers.per_class.size(); ++c) {
            const auto& entries = ex.buffers.per_class[c];
            if (entries.empty()) continue;
            const std::string tag = "proto." + std::to_string(c);
            detail::Tensor xs, ws;
            const auto d = static_cast<std::uint64_t>(entries[0].x.size());
            xs.dims = {entries.size(), d};
            ws.dims = {entries.size()};
            for (const auto& e : entries) {
                for (Eigen::Index j = 0; j < e.x.size(); ++j) xs.data.push_back(e.x(j));
                ws.data.push_back(e.weight);
            }
            tensors[tag + ".x"] = std::move(xs);
            tensors[tag + ".w"] = std::move(ws);
        }
    }
    if (mem) {
        tensors["mem.capacity"] = detail::scalar(static_cast<double>(mem->capacity));
        tensors["mem.n"] = detail::scalar(static_cast<double>(mem->n));
        tensors["mem.n_c"] = detail::from_counts(mem->n_c);
        tensors["mem.m_c"] = detail::from_counts(mem->m_c);
        std::vector<std::uint8_t> full(mem->full_classes.size());
        for (std::size_t i = 0; i < full.size(); ++i)
            full[i] = mem->full_classes[i] ? 1 : 0;
        tensors["mem.full"] = detail::from_counts(full);
        tensors["mem.scores"] = detail::from_counts(mem->scores);
        std::size_t d = 0;
        if (!mem->slots.empty()) d = mem->slots[0].features.size();
        detail::pack_samples(tensors, "mem.slots", mem->slots, d);
    }

    std::string out;
    out.append(kSnapshotMagic, 4);
    detail::put_le(out, kSnapshotVersion);
    detail::put_le(out, static_cast<std::uint8_t>(kind));
    detail::put_le(out, static_cast<std::uint8_t>(mem ? 1 : 0));
    detail::put_le(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) detail::put_tensor(out, name, t);
    return out;
}

inline void save_snapshot(const Learner& learner, const std::string& path,
                          const ReplayMemory* mem = nullptr) {
    const std::string bytes = encode_snapshot(learner, mem);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw io_error("write failure on '" + path + "'");
}

inline LearnerSnapshot decode_snapshot(const std::string& bytes, const std::string& who) {
    if (bytes.size() < 12)
        throw corruption_error(who + ": file shorter than the snapshot header");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (std::memcmp(p, kSnapshotMagic, 4) != 0)
        throw format_error(who + ": not a learner snapshot");
    const auto version = detail::get_le<std::uint16_t>(p + 4);
    if (version != kSnapshotVersion)
        throw version_error(who + ": snapshot version " + std::to_string(version) +
                            " is not supported");
    const auto kind_byte = detail::get_le<std::uint8_t>(p + 6);
    if (kind_byte > 3) throw corruption_error(who + ": unknown learner tag");
    const auto kind = static_cast<LearnerKind>(kind_byte);
    const bool has_mem = detail::get_le<std::uint8_t>(p + 7) != 0;
    const auto tensor_count = detail::get_le<std::uint32_t>(p + 8);

    detail::TensorMap tensors;
    std::size_t off = 12;
    auto want = [&](std::size_t n) {
        if (off + n > bytes.size())
            throw corruption_error(who + ": snapshot truncated");
    };
    for (std::uint32_t i = 0; i < tensor_count; ++i) {
        want(2);
        const auto name_len = detail::get_le<std::uint16_t>(p + off);
        off += 2;
        want(name_len);
        std::string name(bytes.data() + off, name_len);
        off += name_len;
        want(1);
        const auto rank = detail::get_le<std::uint8_t>(p + off);
        off += 1;
        detail::Tensor t;
        std::uint64_t count = 1;
        for (std::uint8_t r = 0; r < rank; ++r) {
            want(8);
            const auto dim = detail::get_le<std::uint64_t>(p + off);
            off += 8;
            t.dims.push_back(dim);
            count *= dim;
        }
        if (count > (bytes.size() - off) / 8)
            throw corruption_error(who + ": snapshot truncated");
        t.data.reserve(count);
        for (std::uint64_t k = 0; k < count; ++k) {
            t.data.push_back(detail::get_f64_le(p + off));
            off += 8;
        }
        tensors.emplace(std::move(name), std::move(t));
    }
    if (off != bytes.size())
        throw corruption_error(who + ": trailing bytes after the last tensor");

    LearnerSnapshot snap;
    switch (kind) {
        case LearnerKind::sgd:
            snap.learner = SgdLearner{detail::unpack_head(tensors, "head")};
            break;
        case LearnerKind::lwf: {
            LwfLearner l;
            l.head = detail::unpack_head(tensors, "head");
            l.teacher = detail::unpack_head(tensors, "teacher");
            l.experiences_seen =
                static_cast<std::uint64_t>(detail::need_scalar(tensors, "seen"));
            snap.learner = std::move(l);
            break;
        }
        case LearnerKind::slda: {
            SldaLearner l;
            l.state.mu = detail::to_matrix(detail::need(tensors, "slda.mu"), "slda.mu");
            const Eigen::VectorXd counts =
                detail::to_vector_d(detail::need(tensors, "slda.n_c"), "slda.n_c");
            l.state.n_c.resize(static_cast<std::size_t>(counts.size()));
            for (Eigen::Index c = 0; c < counts.size(); ++c)
                l.state.n_c[static_cast<std::size_t>(c)] =
                    static_cast<std::uint64_t>(counts(c));
            l.state.sigma =
                detail::to_matrix(detail::need(tensors, "slda.sigma"), "slda.sigma");
            l.state.t = static_cast<std::uint64_t>(detail::need_scalar(tensors, "slda.t"));
            l.state.epsilon = detail::need_scalar(tensors, "slda.epsilon");
            l.state.plastic = detail::need_scalar(tensors, "slda.plastic") != 0.0;
            l.base_left =
                static_cast<std::size_t>(detail::need_scalar(tensors, "slda.base_left"));
            if (tensors.count("slda.base.features"))
                l.base_buffer = detail::unpack_samples(tensors, "slda.base");
            if (l.state.mu.rows() != static_cast<Eigen::Index>(l.state.n_c.size()) ||
                l.state.sigma.rows() != l.state.sigma.cols() ||
                l.state.sigma.rows() != l.state.mu.cols())
                throw corruption_error(who + ": inconsistent discriminant shapes");
            snap.learner = std::move(l);
            break;
        }
        case LearnerKind::exstream: {
            ExStreamLearner l;
            l.head = detail::unpack_head(tensors, "head");
            l.buffers.capacity = static_cast<std::size_t>(
                detail::need_scalar(tensors, "proto.capacity"));
            const auto n_classes = static_cast<std::size_t>(
                detail::need_scalar(tensors, "proto.classes"));
            l.buffers.per_class.resize(n_classes);
            for (std::size_t c = 0; c < n_classes; ++c) {
                const std::string tag = "proto." + std::to_string(c);
                auto it = tensors.find(tag + ".x");
                if (it == tensors.end()) continue;
                const Eigen::MatrixXd xs = detail::to_matrix(it->second, tag + ".x");
                const Eigen::VectorXd ws =
                    detail::to_vector_d(detail::need(tensors, tag + ".w"), tag + ".w");
                if (ws.size() != xs.rows())
                    throw corruption_error(who + ": prototype block length mismatch");
                for (Eigen::Index r = 0; r < xs.rows(); ++r)
                    l.buffers.per_class[c].push_back(
                        {xs.row(r).transpose(), ws(r)});
            }
            snap.learner = std::move(l);
            break;
        }
    }
    if (has_mem) {
        ReplayMemory mem;
        mem.capacity =
            static_cast<std::size_t>(detail::need_scalar(tensors, "mem.capacity"));
        mem.n = static_cast<std::uint64_t>(detail::need_scalar(tensors, "mem.n"));
        const Eigen::VectorXd n_c =
            detail::to_vector_d(detail::need(tensors, "mem.n_c"), "mem.n_c");
        const Eigen::VectorXd m_c =
            detail::to_vector_d(detail::need(tensors, "mem.m_c"), "mem.m_c");
        const Eigen::VectorXd full =
            detail::to_vector_d(detail::need(tensors, "mem.full"), "mem.full");
        if (n_c.size() != m_c.size() || n_c.size() != full.size())
            throw corruption_error(who + ": inconsistent memory bookkeeping");
        for (Eigen::Index c = 0; c < n_c.size(); ++c) {
            mem.n_c.push_back(static_cast<std::uint64_t>(n_c(c)));
            mem.m_c.push_back(static_cast<std::uint64_t>(m_c(c)));
            mem.full_classes.push_back(full(c) != 0.0);
        }
        const Eigen::VectorXd scores =
            detail::to_vector_d(detail::need(tensors, "mem.scores"), "mem.scores");
        mem.scores.assign(scores.data(), scores.data() + scores.size());
        mem.slots = detail::unpack_samples(tensors, "mem.slots");
        if (mem.slots.size() != mem.scores.size())
            throw corruption_error(who + ": memory slots and scores disagree");
        snap.memory = std::move(mem);
    }
    return snap;
}

inline LearnerSnapshot load_snapshot(const std::string& path) {
    return decode_snapshot(read_file_bytes(path), "'" + path + "'");
}

}  // namespace nds
