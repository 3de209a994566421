#include "groktopo/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "groktopo/error.hpp"

namespace groktopo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");
static_assert(sizeof(float) == 4);

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& in, const fs::path& path) {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), 4)) fail(ErrorKind::Io, "truncated tensor header in " + path.string());
    return v;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Io, "malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace

void write_tensor_file(const fs::path& path, const Tensor& tensor) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out.write(kTensorMagic, sizeof(kTensorMagic));
    put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
    for (int d : tensor.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(tensor.data()), static_cast<std::streamsize>(tensor.numel() * 4));
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

Tensor read_tensor_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kTensorMagic, 8) != 0) {
        fail(ErrorKind::Io, "bad tensor magic in " + path.string());
    }
    const std::uint32_t rank = get_u32(in, path);
    if (rank > 8) fail(ErrorKind::Io, "implausible tensor rank " + std::to_string(rank) + " in " + path.string());
    Shape shape;
    for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(static_cast<int>(get_u32(in, path)));
    Tensor t(shape);
    if (!in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.numel() * 4))) {
        fail(ErrorKind::Io, "truncated tensor data in " + path.string());
    }
    return t;
}

void write_tensor_dir(const fs::path& dir, const std::map<std::string, Tensor>& tensors) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    json index = json::object();
    for (const auto& [name, tensor] : tensors) {
        const std::string file = name + ".bin";
        write_tensor_file(dir / file, tensor);
        index[name] = {{"file", file}, {"shape", tensor.shape()}};
    }
    write_json(dir / "tensors.json", index);
}

std::map<std::string, Tensor> read_tensor_dir(const fs::path& dir) {
    const json index = read_json(dir / "tensors.json");
    std::map<std::string, Tensor> out;
    for (const auto& [name, entry] : index.items()) {
        Tensor t = read_tensor_file(dir / entry.at("file").get<std::string>());
        if (t.shape() != entry.at("shape").get<Shape>()) {
            fail(ErrorKind::Io, "tensor " + name + " in " + dir.string() + " disagrees with tensors.json shape");
        }
        out.emplace(name, std::move(t));
    }
    return out;
}

std::string step_dir_name(std::int64_t step) {
    std::ostringstream s;
    s << "step_" << std::setw(6) << std::setfill('0') << step;
    return s.str();
}

void write_checkpoint(const fs::path& dir, const CheckpointRecord& record) {
    std::map<std::string, Tensor> tensors;
    for (std::size_t i = 0; i < record.params.tensors.size(); ++i) {
        const auto& nt = record.params.tensors[i];
        tensors.emplace("param." + nt.name, nt.value);
        if (i < record.optim.m.size()) {
            tensors.emplace("optim.m." + nt.name, record.optim.m[i]);
            tensors.emplace("optim.v." + nt.name, record.optim.v[i]);
        }
    }
    if (record.states) {
        for (std::size_t l = 0; l < record.states->layers.size(); ++l) {
            tensors.emplace("state.layer" + std::to_string(l + 1), record.states->layers[l]);
        }
    }
    write_tensor_dir(dir, tensors);
    const json meta = {{"step", record.step},
                       {"optim_t", record.optim.t},
                       {"train_loss", record.train.loss},
                       {"train_acc", record.train.accuracy},
                       {"test_loss", record.test.loss},
                       {"test_acc", record.test.accuracy},
                       {"has_states", record.states.has_value()}};
    write_json(dir / "checkpoint.json", meta);
}

CheckpointRecord read_checkpoint(const fs::path& dir, const ModelConfig& config) {
    auto tensors = read_tensor_dir(dir);
    const json meta = read_json(dir / "checkpoint.json");
    CheckpointRecord rec;
    rec.step = meta.at("step").get<std::int64_t>();
    rec.optim.t = meta.at("optim_t").get<std::int64_t>();
    rec.train = {meta.at("train_loss").get<double>(), meta.at("train_acc").get<double>()};
    rec.test = {meta.at("test_loss").get<double>(), meta.at("test_acc").get<double>()};

    auto take = [&](const std::string& key) -> Tensor {
        auto it = tensors.find(key);
        if (it == tensors.end()) fail(ErrorKind::Io, "checkpoint " + dir.string() + " lacks tensor " + key);
        return it->second;
    };
    for (const auto& spec : param_layout(config)) {
        Tensor t = take("param." + spec.name);
        if (t.shape() != spec.shape) {
            fail(ErrorKind::Io, "checkpoint tensor " + spec.name + " has shape " + shape_str(t.shape()) + ", expected " +
                                    shape_str(spec.shape));
        }
        rec.params.tensors.push_back({spec.name, std::move(t), spec.decay});
        if (tensors.count("optim.m." + spec.name)) {
            rec.optim.m.push_back(take("optim.m." + spec.name));
            rec.optim.v.push_back(take("optim.v." + spec.name));
        }
    }
    if (meta.value("has_states", false)) {
        CapturedStates states;
        states.embedding = rec.params.at("tok_emb");
        for (int l = 1; tensors.count("state.layer" + std::to_string(l)); ++l) {
            states.layers.push_back(take("state.layer" + std::to_string(l)));
        }
        rec.states = std::move(states);
    }
    return rec;
}

}  // namespace groktopo
