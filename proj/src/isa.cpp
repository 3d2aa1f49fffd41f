#include "pimsim/isa.hpp"

#include <algorithm>

#include "pimsim/nn_ir.hpp"

namespace pimsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view class_name(InstClass c) {
  switch (c) {
    case InstClass::Matrix: return "matrix";
    case InstClass::Vector: return "vector";
    case InstClass::Transfer: return "transfer";
    case InstClass::Scalar: return "scalar";
  }
  return "?";
}

InstClass class_of(const Instruction& inst) {
  return std::visit(
      Overloaded{
          [](const inst::Mvm&) { return InstClass::Matrix; },
          [](const inst::VAdd&) { return InstClass::Vector; },
          [](const inst::VMax&) { return InstClass::Vector; },
          [](const inst::VRelu&) { return InstClass::Vector; },
          [](const inst::VCopy&) { return InstClass::Vector; },
          [](const inst::VScale&) { return InstClass::Vector; },
          [](const inst::Send&) { return InstClass::Transfer; },
          [](const inst::Recv&) { return InstClass::Transfer; },
          [](const inst::Load&) { return InstClass::Transfer; },
          [](const inst::Store&) { return InstClass::Transfer; },
          [](const inst::Li&) { return InstClass::Scalar; },
          [](const inst::SArith&) { return InstClass::Scalar; },
          [](const inst::Bne&) { return InstClass::Scalar; },
          [](const inst::Jmp&) { return InstClass::Scalar; },
          [](const inst::Nop&) { return InstClass::Scalar; },
          [](const inst::Halt&) { return InstClass::Scalar; },
      },
      inst);
}

std::string_view mnemonic(const Instruction& inst) {
  return std::visit(
      Overloaded{
          [](const inst::Mvm&) -> std::string_view { return "MVM"; },
          [](const inst::VAdd&) -> std::string_view { return "VADD"; },
          [](const inst::VMax&) -> std::string_view { return "VMAX"; },
          [](const inst::VRelu&) -> std::string_view { return "VRELU"; },
          [](const inst::VCopy&) -> std::string_view { return "VCOPY"; },
          [](const inst::VScale&) -> std::string_view { return "VSCALE"; },
          [](const inst::Send&) -> std::string_view { return "SEND"; },
          [](const inst::Recv&) -> std::string_view { return "RECV"; },
          [](const inst::Load&) -> std::string_view { return "LOAD"; },
          [](const inst::Store&) -> std::string_view { return "STORE"; },
          [](const inst::Li&) -> std::string_view { return "LI"; },
          [](const inst::SArith& s) -> std::string_view {
            return s.op == inst::ScalarOp::Add ? "SADD" : s.op == inst::ScalarOp::Sub ? "SSUB" : "SMUL";
          },
          [](const inst::Bne&) -> std::string_view { return "BNE"; },
          [](const inst::Jmp&) -> std::string_view { return "JMP"; },
          [](const inst::Nop&) -> std::string_view { return "NOP"; },
          [](const inst::Halt&) -> std::string_view { return "HALT"; },
      },
      inst);
}

bool is_branch(const Instruction& inst) {
  return std::holds_alternative<inst::Bne>(inst) || std::holds_alternative<inst::Jmp>(inst);
}

const GroupEntry* CoreProgram::find_group(int id) const {
  auto it = std::find_if(groups.begin(), groups.end(), [id](const GroupEntry& g) { return g.id == id; });
  return it == groups.end() ? nullptr : &*it;
}

std::vector<std::int8_t> materialize_weights(const WeightImage& img, int rows, int cols) {
  if (img.seed) return generate_weights(*img.seed, rows, cols);
  std::vector<std::int8_t> out(static_cast<std::size_t>(rows) * cols, 0);
  std::copy_n(img.data.begin(), std::min(img.data.size(), out.size()), out.begin());
  return out;
}

Footprint footprint_of(const Instruction& instruction, const GroupEntry* group) {
  Footprint fp;
  auto span = [](Addr base, Len bytes) { return Interval{base, base + bytes}; };
  std::visit(Overloaded{
                 [&](const inst::Mvm& i) {
                   if (!group) return;
                   fp.mem_reads.push_back(span(i.src, group->input_len));
                   for (const auto& m : group->members)
                     fp.mem_writes.push_back(span(i.dst + m.out_offset, Len{m.out_len} * 4));
                 },
                 [&](const inst::VAdd& i) {
                   Len bytes = i.len * static_cast<Len>(i.width);
                   fp.mem_reads = {span(i.src1, bytes), span(i.src2, bytes)};
                   fp.mem_writes = {span(i.dst, bytes)};
                 },
                 [&](const inst::VMax& i) {
                   Len bytes = i.len * static_cast<Len>(i.width);
                   fp.mem_reads = {span(i.src1, bytes), span(i.src2, bytes)};
                   fp.mem_writes = {span(i.dst, bytes)};
                 },
                 [&](const inst::VRelu& i) {
                   fp.mem_reads = {span(i.src, i.len)};
                   fp.mem_writes = {span(i.dst, i.len)};
                 },
                 [&](const inst::VCopy& i) {
                   fp.mem_reads = {span(i.src, (i.len - 1) * i.src_stride + 1)};
                   fp.mem_writes = {span(i.dst, i.len)};
                 },
                 [&](const inst::VScale& i) {
                   fp.mem_reads = {span(i.src, i.len * 4)};
                   fp.mem_writes = {span(i.dst, i.len)};
                 },
                 [&](const inst::Send& i) { fp.mem_reads = {span(i.src, i.len)}; },
                 [&](const inst::Recv& i) { fp.mem_writes = {span(i.dst, i.len)}; },
                 [&](const inst::Load& i) { fp.mem_writes = {span(i.dst, i.len)}; },
                 [&](const inst::Store& i) { fp.mem_reads = {span(i.src, i.len)}; },
                 [&](const inst::Li& i) { fp.reg_writes = {i.reg}; },
                 [&](const inst::SArith& i) {
                   fp.reg_reads = {i.ra, i.rb};
                   fp.reg_writes = {i.rd};
                 },
                 [&](const inst::Bne& i) { fp.reg_reads = {i.ra, i.rb}; },
                 [](const inst::Jmp&) {},
                 [](const inst::Nop&) {},
                 [](const inst::Halt&) {},
             },
             instruction);
  return fp;
}

}  // namespace pimsim
