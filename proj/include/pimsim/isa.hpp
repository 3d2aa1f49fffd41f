#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pimsim/arch_config.hpp"
#include "pimsim/error.hpp"

namespace pimsim {

using Addr = std::int64_t;
using Len = std::int64_t;

enum class InstClass { Matrix = 0, Vector = 1, Transfer = 2, Scalar = 3 };
inline constexpr int kNumInstClasses = 4;
std::string_view class_name(InstClass c);

/// Element width for VADD / VMAX. MVM partial sums are words; activations are bytes.
enum class ElemWidth : std::uint8_t { Byte = 1, Word = 4 };

namespace inst {

struct Mvm {
  int group = 0;
  Addr src = 0;
  Addr dst = 0;
  friend bool operator==(const Mvm&, const Mvm&) = default;
};

struct VAdd {
  ElemWidth width = ElemWidth::Word;
  Addr dst = 0, src1 = 0, src2 = 0;
  Len len = 1;
  friend bool operator==(const VAdd&, const VAdd&) = default;
};

struct VMax {
  ElemWidth width = ElemWidth::Word;
  Addr dst = 0, src1 = 0, src2 = 0;
  Len len = 1;
  friend bool operator==(const VMax&, const VMax&) = default;
};

struct VRelu {
  Addr dst = 0, src = 0;
  Len len = 1;
  friend bool operator==(const VRelu&, const VRelu&) = default;
};

/// dst[i] = src[i * src_stride] for i < len (bytes).
struct VCopy {
  Addr dst = 0, src = 0;
  Len len = 1;
  Len src_stride = 1;
  friend bool operator==(const VCopy&, const VCopy&) = default;
};

/// Reads len int32 values at src, writes len requantized int8 values at dst.
struct VScale {
  Addr dst = 0, src = 0;
  Len len = 1;
  std::int32_t multiplier = 1;
  int shift = 0;
  friend bool operator==(const VScale&, const VScale&) = default;
};

struct Send {
  int dst_core = 0;
  Addr src = 0;
  Len len = 1;
  int tag = 0;
  friend bool operator==(const Send&, const Send&) = default;
};

struct Recv {
  int src_core = 0;
  Addr dst = 0;
  Len len = 1;
  int tag = 0;
  friend bool operator==(const Recv&, const Recv&) = default;
};

struct Load {
  Addr dst = 0;
  Addr gaddr = 0;
  Len len = 1;
  friend bool operator==(const Load&, const Load&) = default;
};

struct Store {
  Addr gaddr = 0;
  Addr src = 0;
  Len len = 1;
  friend bool operator==(const Store&, const Store&) = default;
};

struct Li {
  int reg = 0;
  std::int64_t imm = 0;
  friend bool operator==(const Li&, const Li&) = default;
};

enum class ScalarOp { Add, Sub, Mul };

struct SArith {
  ScalarOp op = ScalarOp::Add;
  int rd = 0, ra = 0, rb = 0;
  friend bool operator==(const SArith&, const SArith&) = default;
};

/// Branch targets are instruction indices within the core's stream.
struct Bne {
  int ra = 0, rb = 0;
  int target = 0;
  friend bool operator==(const Bne&, const Bne&) = default;
};

struct Jmp {
  int target = 0;
  friend bool operator==(const Jmp&, const Jmp&) = default;
};

struct Nop {
  friend bool operator==(const Nop&, const Nop&) = default;
};

struct Halt {
  friend bool operator==(const Halt&, const Halt&) = default;
};

}  // namespace inst

using Instruction = std::variant<inst::Mvm, inst::VAdd, inst::VMax, inst::VRelu, inst::VCopy,
                                 inst::VScale, inst::Send, inst::Recv, inst::Load, inst::Store,
                                 inst::Li, inst::SArith, inst::Bne, inst::Jmp, inst::Nop,
                                 inst::Halt>;

InstClass class_of(const Instruction& inst);
/// Mnemonic without width suffix, e.g. "VADD".
std::string_view mnemonic(const Instruction& inst);
bool is_branch(const Instruction& inst);

struct GroupMember {
  int xbar = 0;
  Addr out_offset = 0;  // bytes, added to the MVM dst
  int out_len = 0;      // output elements (int32 each)
  friend bool operator==(const GroupMember&, const GroupMember&) = default;
};

/// Crossbars of one matrix that read the same input slice; one MVM drives all members.
struct GroupEntry {
  int id = 0;
  int input_len = 0;
  std::vector<GroupMember> members;
  friend bool operator==(const GroupEntry&, const GroupEntry&) = default;
};

/// Crossbar contents: either generated from a seed or literal row-major int8 data.
/// `file` only records where literal data came from / goes to; it is not part of equality.
struct WeightImage {
  std::optional<std::uint64_t> seed;
  std::vector<std::int8_t> data;
  std::string file;

  friend bool operator==(const WeightImage& a, const WeightImage& b) {
    return a.seed == b.seed && a.data == b.data;
  }
};

struct CoreProgram {
  std::vector<Instruction> code;
  std::vector<int> layer_tags;  // parallel to code; -1 = untagged
  std::vector<GroupEntry> groups;
  std::map<int, WeightImage> weights;  // xbar id -> image

  const GroupEntry* find_group(int id) const;
  void push(Instruction inst, int layer = -1) {
    code.push_back(std::move(inst));
    layer_tags.push_back(layer);
  }
  friend bool operator==(const CoreProgram&, const CoreProgram&) = default;
};

struct Program {
  std::map<int, CoreProgram> cores;
  friend bool operator==(const Program&, const Program&) = default;
};

/// Materializes a crossbar image at the configured geometry (missing -> zeros).
std::vector<std::int8_t> materialize_weights(const WeightImage& img, int rows, int cols);

class AsmError : public Error {
 public:
  AsmError(int line, const std::string& message)
      : Error("asm line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Loads literal weight data named by `.weights ... file=` directives.
using WeightReader = std::function<std::vector<std::int8_t>(const std::string& file)>;
/// Persists literal weight data for emission; returns the file name to reference.
using WeightWriter =
    std::function<std::string(int core, int xbar, std::span<const std::int8_t> data)>;

Program parse_asm(std::string_view text, const WeightReader& reader = {});
std::string emit_asm(const Program& program, const WeightWriter& writer = {});

/// Reader resolving relative names against a directory.
WeightReader file_weight_reader(const std::string& base_dir);
/// Writer storing `core<C>_xbar<X>.bin` files under a directory.
WeightWriter file_weight_writer(const std::string& out_dir);

/// Footprint of an instruction over local memory: half-open byte intervals.
struct Interval {
  Addr lo = 0;
  Addr hi = 0;
  bool overlaps(const Interval& o) const { return lo < o.hi && o.lo < hi; }
};

struct Footprint {
  std::vector<Interval> mem_reads;
  std::vector<Interval> mem_writes;
  std::vector<int> reg_reads;
  std::vector<int> reg_writes;
};

/// Requires `group` for MVM (nullptr -> no member writes).
Footprint footprint_of(const Instruction& inst, const GroupEntry* group);

std::vector<Violation> validate_program(const Program& program, const ArchConfig& cfg);

}  // namespace pimsim
